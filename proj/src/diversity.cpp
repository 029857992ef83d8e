#include "divsamp/diversity.hpp"

#include <algorithm>
#include <cmath>

#include "divsamp/errors.hpp"

namespace divsamp {

namespace {

constexpr double kWeightFloor = 0.01;

struct Fragment {
    std::string sig;
    int height = 0;
    bool has_terminal = false;
    bool has_hole = false;
};

// Truncate the subtree at `v` to `budget` edges. Nodes on the frontier keep
// their label; each pruned child subtree becomes one hole marker.
Fragment build_fragment(const ParseTree& v, int budget) {
    Fragment f;
    if (v.is_leaf()) {
        f.sig = v.token->text;
        f.has_terminal = true;
        return f;
    }
    f.sig = "( ";
    f.sig += node_kind_name(v.kind);
    if (budget == 0) {
        for (std::size_t i = 0; i < v.children.size(); ++i) {
            f.sig += " ";
            f.sig += kHoleMarker;
        }
        f.height = 1;
        f.has_hole = true;
    } else {
        for (const ParseTree& c : v.children) {
            Fragment part = build_fragment(c, budget - 1);
            f.sig += " " + part.sig;
            f.height = std::max(f.height, 1 + part.height);
            f.has_terminal = f.has_terminal || part.has_terminal;
            f.has_hole = f.has_hole || part.has_hole;
        }
    }
    f.sig += " )";
    return f;
}

bool valid_compound(const Fragment& f) { return f.height <= 2 && f.has_terminal; }

void collect(const ParseTree& v, CompoundExtraction& out) {
    if (!v.is_leaf()) {
        Fragment f1 = build_fragment(v, 1);
        Fragment f2 = build_fragment(v, 2);
        if (valid_compound(f1)) out.occurrences[f1.sig] += 1;
        if (valid_compound(f2) && f2.sig != f1.sig) out.occurrences[f2.sig] += 1;

        // A hole-free height-2 fragment strictly contains its own height-1
        // truncation and every >=2-node child subtree.
        if (valid_compound(f2) && !f2.has_hole && f2.height == 2) {
            std::vector<std::string> inner;
            if (valid_compound(f1) && f1.sig != f2.sig) inner.push_back(f1.sig);
            for (const ParseTree& c : v.children) {
                if (c.is_leaf()) continue;
                Fragment sub = build_fragment(c, 1);
                if (valid_compound(sub)) inner.push_back(sub.sig);
            }
            std::sort(inner.begin(), inner.end());
            inner.erase(std::unique(inner.begin(), inner.end()), inner.end());
            if (!inner.empty()) {
                std::vector<std::string>& slot = out.contained[f2.sig];
                if (slot.empty()) slot = std::move(inner);
            }
        }
        for (const ParseTree& c : v.children) collect(c, out);
    }
}

void accumulate_atoms(const ParseTree& v, Counts& out) {
    if (v.is_leaf()) {
        out[v.token->text] += 1;
        return;
    }
    out[node_kind_name(v.kind)] += 1;
    for (const ParseTree& c : v.children) accumulate_atoms(c, out);
}

ParseTree parse_abstract(const Example& ex, std::size_t id, const Schema& schema) {
    try {
        return abstract_entities_tree(parse_query(ex.query, schema));
    } catch (const DataError& e) {
        throw DataError("example " + std::to_string(id) + ": " + e.what());
    }
}

}  // namespace

std::map<std::string, double> Distribution::normalized() const {
    std::map<std::string, double> out;
    if (total <= 0.0) return out;
    for (const auto& [label, w] : entries) out[label] = w / total;
    return out;
}

Counts extract_atoms(const ParseTree& tree) {
    Counts out;
    accumulate_atoms(tree, out);
    return out;
}

Counts extract_compounds(const ParseTree& tree) {
    return extract_compounds_detailed(tree).occurrences;
}

void CompoundExtraction::merge(const CompoundExtraction& other) {
    for (const auto& [sig, n] : other.occurrences) occurrences[sig] += n;
    for (const auto& [sig, inner] : other.contained) {
        std::vector<std::string>& slot = contained[sig];
        if (slot.empty()) slot = inner;
    }
}

CompoundExtraction extract_compounds_detailed(const ParseTree& tree) {
    CompoundExtraction out;
    collect(tree, out);
    return out;
}

Distribution weight_compounds(
    const Counts& occ, const std::map<std::string, std::vector<std::string>>& contained) {
    std::map<std::string, std::size_t> super_occ;  // compound -> max super occurrence
    for (const auto& [super, inner] : contained) {
        auto it = occ.find(super);
        if (it == occ.end() || it->second == 0) continue;
        for (const std::string& sig : inner) {
            std::size_t& best = super_occ[sig];
            best = std::max(best, it->second);
        }
    }
    Distribution dist;
    for (const auto& [sig, n] : occ) {
        double w = 1.0;
        auto it = super_occ.find(sig);
        if (it != super_occ.end()) {
            w = 1.0 - static_cast<double>(it->second) / static_cast<double>(n);
            w = std::clamp(w, kWeightFloor, 1.0);
        }
        dist.add(sig, w * static_cast<double>(n));
    }
    return dist;
}

double entropy(const Distribution& dist) {
    if (dist.total <= 0.0) throw EmptyDistributionError();
    double h = 0.0;
    for (const auto& [label, w] : dist.entries) {
        if (w <= 0.0) continue;
        double p = w / dist.total;
        h -= p * std::log2(p);
    }
    return h;
}

Distribution atom_distribution(std::span<const Example> sample, const Schema& schema) {
    Distribution dist;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        Counts atoms = extract_atoms(parse_abstract(sample[i], i, schema));
        for (const auto& [label, n] : atoms) dist.add(label, static_cast<double>(n));
    }
    return dist;
}

Distribution weighted_compound_distribution(std::span<const Example> sample,
                                            const Schema& schema) {
    CompoundExtraction all;
    for (std::size_t i = 0; i < sample.size(); ++i)
        all.merge(extract_compounds_detailed(parse_abstract(sample[i], i, schema)));
    return weight_compounds(all.occurrences, all.contained);
}

DiversityReport diversity_report(std::span<const Example> sample, const Schema& schema) {
    DiversityReport report;
    Distribution atoms;
    CompoundExtraction comps;
    for (std::size_t i = 0; i < sample.size(); ++i) {
        ParseTree tree = parse_abstract(sample[i], i, schema);
        Counts a = extract_atoms(tree);
        for (const auto& [label, n] : a) atoms.add(label, static_cast<double>(n));
        comps.merge(extract_compounds_detailed(tree));
        report.template_distribution.add(abstract_template(tree).text, 1.0);
    }
    report.distinct_templates = report.template_distribution.entries.size();
    if (atoms.total > 0.0) report.atom_entropy_bits = entropy(atoms);
    Distribution weighted = weight_compounds(comps.occurrences, comps.contained);
    if (weighted.total > 0.0) report.compound_entropy_bits = entropy(weighted);
    return report;
}

ConsistencyGroups consistency_groups(std::span<const Example> examples, const Schema& schema,
                                     const std::map<std::size_t, bool>& correct) {
    std::map<std::string, std::vector<std::size_t>> keyed;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        if (correct.find(i) == correct.end()) throw MissingFlagError(i);
        keyed[render_query(parse_abstract(examples[i], i, schema))].push_back(i);
    }
    ConsistencyGroups out;
    for (auto& [key, ids] : keyed) {
        if (ids.size() >= 2) {
            bool all = true;
            for (std::size_t id : ids) all = all && correct.at(id);
            if (all) ++out.fully_correct;
        }
        out.groups.push_back(std::move(ids));
    }
    return out;
}

}  // namespace divsamp
