#include "divsamp/samplers.hpp"

#include <algorithm>
#include <cmath>

#include "divsamp/errors.hpp"
#include "divsamp/rng.hpp"

namespace divsamp {

namespace {

constexpr double kWeightFloor = 0.01;

double xlog2(double w) { return w > 0.0 ? w * std::log2(w) : 0.0; }

double entropy_bits(double total, double sum_wlogw) {
    return total > 0.0 ? std::log2(total) - sum_wlogw / total : 0.0;
}

/// Fenwick tree over non-negative weights; supports point updates and
/// sampling an index proportionally to its weight.
class WeightedIndex {
  public:
    explicit WeightedIndex(const std::vector<double>& weights)
        : n_(weights.size()), tree_(n_ + 1, 0.0), weight_(weights) {
        for (std::size_t i = 0; i < n_; ++i) raw_add(i, weights[i]);
        total_ = 0.0;
        for (double w : weights) total_ += w;
    }

    double total() const { return total_; }

    void clear(std::size_t i) {
        if (weight_[i] == 0.0) return;
        raw_add(i, -weight_[i]);
        total_ -= weight_[i];
        weight_[i] = 0.0;
    }

    std::size_t pick(double r) const {  // r in [0, total)
        std::size_t pos = 0;
        std::size_t mask = 1;
        while ((mask << 1) <= n_) mask <<= 1;
        for (; mask; mask >>= 1) {
            std::size_t next = pos + mask;
            if (next <= n_ && tree_[next] <= r) {
                pos = next;
                r -= tree_[next];
            }
        }
        if (pos >= n_) pos = n_ - 1;
        if (weight_[pos] == 0.0) {  // float roundoff landed on a dead slot
            for (std::size_t k = 0; k < n_; ++k) {
                std::size_t cand = (pos + k) % n_;
                if (weight_[cand] > 0.0) return cand;
            }
        }
        return pos;
    }

  private:
    void raw_add(std::size_t i, double delta) {
        for (++i; i <= n_; i += i & (0 - i)) tree_[i] += delta;
    }

    std::size_t n_;
    std::vector<double> tree_;
    std::vector<double> weight_;
    double total_ = 0.0;
};

/// Incremental H(A)+H(C) over interned candidate multisets. Evaluation of a
/// prospective candidate applies its deltas, reads the objective and rolls
/// back, so one scan over all live candidates is O(sum of candidate sizes).
class DiversityTracker {
  public:
    explicit DiversityTracker(const SamplerPool& pool)
        : pool_(&pool),
          atom_w_(pool.atom_count(), 0.0),
          comp_occ_(pool.compound_count(), 0.0),
          comp_mass_(pool.compound_count(), 0.0),
          stamp_(pool.compound_count(), 0) {}

    double evaluate_with(std::uint32_t cid) {
        double wa = wa_, sa = sa_;
        for (const auto& [aid, cnt] : pool_->candidate_atoms(cid)) {
            double old_w = atom_w_[aid];
            double new_w = old_w + cnt;
            sa += xlog2(new_w) - xlog2(old_w);
            wa += cnt;
        }
        mark_affected(cid);
        for (const auto& [comp, cnt] : pool_->candidate_compounds(cid)) comp_occ_[comp] += cnt;
        double wc = wc_, sc = sc_;
        for (std::uint32_t comp : affected_) {
            double new_mass = mass_of(comp);
            wc += new_mass - comp_mass_[comp];
            sc += xlog2(new_mass) - xlog2(comp_mass_[comp]);
        }
        for (const auto& [comp, cnt] : pool_->candidate_compounds(cid)) comp_occ_[comp] -= cnt;
        return entropy_bits(wa, sa) + entropy_bits(wc, sc);
    }

    void add(std::uint32_t cid) {
        for (const auto& [aid, cnt] : pool_->candidate_atoms(cid)) {
            double old_w = atom_w_[aid];
            double new_w = old_w + cnt;
            sa_ += xlog2(new_w) - xlog2(old_w);
            wa_ += cnt;
            atom_w_[aid] = new_w;
        }
        mark_affected(cid);
        for (const auto& [comp, cnt] : pool_->candidate_compounds(cid)) comp_occ_[comp] += cnt;
        for (std::uint32_t comp : affected_) {
            double new_mass = mass_of(comp);
            wc_ += new_mass - comp_mass_[comp];
            sc_ += xlog2(new_mass) - xlog2(comp_mass_[comp]);
            comp_mass_[comp] = new_mass;
        }
    }

  private:
    void mark_affected(std::uint32_t cid) {
        ++epoch_;
        affected_.clear();
        for (const auto& [comp, cnt] : pool_->candidate_compounds(cid)) {
            touch(comp);
            for (std::uint32_t inner : pool_->compound_contained(comp)) touch(inner);
        }
    }
    void touch(std::uint32_t comp) {
        if (stamp_[comp] != epoch_) {
            stamp_[comp] = epoch_;
            affected_.push_back(comp);
        }
    }
    double mass_of(std::uint32_t comp) const {
        double occ = comp_occ_[comp];
        if (occ <= 0.0) return 0.0;
        double super_occ = 0.0;
        for (std::uint32_t g : pool_->compound_supers(comp))
            super_occ = std::max(super_occ, comp_occ_[g]);
        if (super_occ <= 0.0) return occ;
        double w = std::clamp(1.0 - super_occ / occ, kWeightFloor, 1.0);
        return w * occ;
    }

    const SamplerPool* pool_;
    std::vector<double> atom_w_;
    double wa_ = 0.0, sa_ = 0.0;
    std::vector<double> comp_occ_;
    std::vector<double> comp_mass_;
    double wc_ = 0.0, sc_ = 0.0;
    std::vector<std::uint64_t> stamp_;
    std::uint64_t epoch_ = 0;
    std::vector<std::uint32_t> affected_;
};

SampleState finalize(const SamplerPool& pool, std::vector<std::size_t> chosen) {
    SampleState state;
    state.chosen = std::move(chosen);
    for (std::size_t id : state.chosen)
        state.template_counts[pool.template_text(pool.template_of(id))] += 1;

    if (pool.has_candidates()) {
        std::vector<std::size_t> atom_counts(pool.atom_count(), 0);
        std::vector<std::size_t> comp_counts(pool.compound_count(), 0);
        for (std::size_t id : state.chosen) {
            std::uint32_t cid = pool.candidate_of(id);
            for (const auto& [aid, cnt] : pool.candidate_atoms(cid)) atom_counts[aid] += cnt;
            for (const auto& [comp, cnt] : pool.candidate_compounds(cid)) comp_counts[comp] += cnt;
        }
        Counts occ;
        std::map<std::string, std::vector<std::string>> contained;
        for (std::uint32_t a = 0; a < atom_counts.size(); ++a)
            if (atom_counts[a] > 0)
                state.atom_dist.add(pool.atom_label(a), static_cast<double>(atom_counts[a]));
        for (std::uint32_t c = 0; c < comp_counts.size(); ++c) {
            if (comp_counts[c] == 0) continue;
            occ[pool.compound_label(c)] = comp_counts[c];
            if (!pool.compound_contained(c).empty()) {
                std::vector<std::string>& inner = contained[pool.compound_label(c)];
                for (std::uint32_t f : pool.compound_contained(c))
                    inner.push_back(pool.compound_label(f));
            }
        }
        state.compound_dist = weight_compounds(occ, contained);
    } else {
        Distribution atoms;
        CompoundExtraction comps;
        for (std::size_t id : state.chosen) {
            ParseTree tree = parse_query(pool.abstract_query(id), pool.schema());
            for (const auto& [label, n] : extract_atoms(tree))
                atoms.add(label, static_cast<double>(n));
            comps.merge(extract_compounds_detailed(tree));
        }
        state.atom_dist = std::move(atoms);
        state.compound_dist = weight_compounds(comps.occurrences, comps.contained);
    }
    return state;
}

struct GreedyScratch {
    DiversityTracker tracker;
    std::vector<std::uint32_t> live;              // candidate ids, ascending
    std::vector<std::vector<std::uint32_t>> left;  // remaining member ids per candidate

    explicit GreedyScratch(const SamplerPool& pool) : tracker(pool) {
        live.reserve(pool.candidate_count());
        left.reserve(pool.candidate_count());
        for (std::uint32_t cid = 0; cid < pool.candidate_count(); ++cid) {
            live.push_back(cid);
            left.push_back(pool.candidate_members(cid));
        }
    }

    void drop_live(std::uint32_t cid) {
        auto it = std::lower_bound(live.begin(), live.end(), cid);
        if (it != live.end() && *it == cid) live.erase(it);
    }

    /// Evaluate candidates (ascending id = lexicographic signature order) and
    /// keep the strictly best, which makes ties resolve to the smallest
    /// signature. Returns the chosen concrete example id.
    std::size_t greedy_step(const std::vector<std::uint32_t>& scan, Rng& pick_rng) {
        if (scan.empty()) throw NoLiveCandidatesError();
        double best = -1.0;
        std::uint32_t best_cid = scan.front();
        for (std::uint32_t cid : scan) {
            double value = tracker.evaluate_with(cid);
            if (value > best) {
                best = value;
                best_cid = cid;
            }
        }
        tracker.add(best_cid);
        std::vector<std::uint32_t>& members = left[best_cid];
        std::size_t at = static_cast<std::size_t>(pick_rng.below(members.size()));
        std::size_t chosen = members[at];
        members[at] = members.back();
        members.pop_back();
        if (members.empty()) drop_live(best_cid);
        return chosen;
    }
};

std::vector<std::uint32_t> subsample_scan(const std::vector<std::uint32_t>& live, std::size_t cap,
                                          Rng& rng) {
    if (live.size() <= cap) return live;
    std::vector<std::size_t> picked = rng.sample_indices(live.size(), cap);
    std::vector<std::uint32_t> scan;
    scan.reserve(cap);
    for (std::size_t i : picked) scan.push_back(live[i]);
    std::sort(scan.begin(), scan.end());
    return scan;
}

void require_pool(const SamplerPool& pool, std::size_t n) {
    if (n > pool.size()) throw PoolTooSmallError(n, pool.size());
}

}  // namespace

const char* sample_method_name(SampleMethod m) {
    switch (m) {
        case SampleMethod::Uniform: return "uniform";
        case SampleMethod::Uat: return "uat";
        case SampleMethod::CMaxEnt: return "cmaxent";
        case SampleMethod::Hybrid: return "hybrid";
    }
    return "?";
}

std::optional<SampleMethod> parse_sample_method(const std::string& name) {
    if (name == "uniform") return SampleMethod::Uniform;
    if (name == "uat") return SampleMethod::Uat;
    if (name == "cmaxent") return SampleMethod::CMaxEnt;
    if (name == "hybrid") return SampleMethod::Hybrid;
    return std::nullopt;
}

void SamplerConfig::validate() const {
    if (size < 1) throw ConfigError("size: must be >= 1");
    if (method == SampleMethod::Uat) {
        if (!alpha) throw ConfigError("alpha: required for method uat");
        if (*alpha < 0.0 || *alpha > 1.0) throw ConfigError("alpha: must be in [0,1]");
    } else if (alpha) {
        throw ConfigError("alpha: only valid for method uat");
    }
    if (candidate_cap) {
        if (*candidate_cap < 1) throw ConfigError("candidate-cap: must be >= 1");
        if (method != SampleMethod::CMaxEnt && method != SampleMethod::Hybrid)
            throw ConfigError("candidate-cap: only valid for methods cmaxent and hybrid");
    }
}

SamplerPool SamplerPool::build(const Schema& schema, std::vector<Example> examples,
                               bool with_candidates) {
    SamplerPool pool;
    pool.schema_ = &schema;
    pool.examples_ = std::move(examples);
    pool.with_candidates_ = with_candidates;

    std::vector<std::string> tmpl_of(pool.examples_.size());
    pool.abstract_of_.resize(pool.examples_.size());
    for (std::size_t i = 0; i < pool.examples_.size(); ++i) {
        try {
            ParseTree tree = parse_query(pool.examples_[i].query, schema);
            tmpl_of[i] = abstract_template(tree).text;
            pool.abstract_of_[i] = render_query(abstract_entities_tree(tree));
        } catch (const DataError& e) {
            throw DataError("example " + std::to_string(i) + ": " + e.what());
        }
    }

    // Template ids in lexicographic order.
    std::map<std::string, std::uint32_t> tmpl_id;
    for (const std::string& t : tmpl_of) tmpl_id.emplace(t, 0);
    for (auto& [text, id] : tmpl_id) {
        id = static_cast<std::uint32_t>(pool.template_text_.size());
        pool.template_text_.push_back(text);
    }
    pool.template_members_.resize(pool.template_text_.size());
    pool.template_of_.resize(pool.examples_.size());
    for (std::size_t i = 0; i < pool.examples_.size(); ++i) {
        std::uint32_t tid = tmpl_id.at(tmpl_of[i]);
        pool.template_of_[i] = tid;
        pool.template_members_[tid].push_back(static_cast<std::uint32_t>(i));
    }

    if (!with_candidates) return pool;

    // Candidate ids in lexicographic signature order; cid order doubles as
    // the greedy tie-break.
    std::map<std::string, std::uint32_t> cand_id;
    for (const std::string& sig : pool.abstract_of_) cand_id.emplace(sig, 0);
    for (auto& [sig, id] : cand_id) {
        id = static_cast<std::uint32_t>(pool.candidate_sig_.size());
        pool.candidate_sig_.push_back(sig);
    }
    const std::size_t n_cands = pool.candidate_sig_.size();
    pool.candidate_members_.resize(n_cands);
    pool.candidate_template_.assign(n_cands, 0);
    pool.candidate_of_.resize(pool.examples_.size());
    for (std::size_t i = 0; i < pool.examples_.size(); ++i) {
        std::uint32_t cid = cand_id.at(pool.abstract_of_[i]);
        pool.candidate_of_[i] = cid;
        pool.candidate_members_[cid].push_back(static_cast<std::uint32_t>(i));
        pool.candidate_template_[cid] = pool.template_of_[i];
    }
    pool.template_candidates_.resize(pool.template_text_.size());
    for (std::uint32_t cid = 0; cid < n_cands; ++cid)
        pool.template_candidates_[pool.candidate_template_[cid]].push_back(cid);

    std::map<std::string, std::uint32_t> atom_id;
    std::map<std::string, std::uint32_t> comp_id;
    auto intern = [](std::map<std::string, std::uint32_t>& ids, std::vector<std::string>& labels,
                     const std::string& text) {
        auto [it, inserted] = ids.emplace(text, static_cast<std::uint32_t>(labels.size()));
        if (inserted) labels.push_back(text);
        return it->second;
    };

    pool.cand_atoms_.resize(n_cands);
    pool.cand_comps_.resize(n_cands);
    std::map<std::uint32_t, std::vector<std::uint32_t>> contained_edges;
    for (std::uint32_t cid = 0; cid < n_cands; ++cid) {
        ParseTree tree = parse_query(pool.candidate_sig_[cid], schema);
        for (const auto& [label, n] : extract_atoms(tree))
            pool.cand_atoms_[cid].emplace_back(intern(atom_id, pool.atom_label_, label),
                                               static_cast<std::uint32_t>(n));
        CompoundExtraction comps = extract_compounds_detailed(tree);
        for (const auto& [sig, n] : comps.occurrences)
            pool.cand_comps_[cid].emplace_back(intern(comp_id, pool.comp_label_, sig),
                                               static_cast<std::uint32_t>(n));
        for (const auto& [super, inner] : comps.contained) {
            std::uint32_t g = intern(comp_id, pool.comp_label_, super);
            auto [it, inserted] = contained_edges.try_emplace(g);
            if (!inserted) continue;
            for (const std::string& sig : inner)
                it->second.push_back(intern(comp_id, pool.comp_label_, sig));
        }
    }
    pool.comp_contained_.resize(pool.comp_label_.size());
    pool.comp_supers_.resize(pool.comp_label_.size());
    for (const auto& [g, inner] : contained_edges) {
        pool.comp_contained_[g] = inner;
        for (std::uint32_t f : inner) pool.comp_supers_[f].push_back(g);
    }
    for (auto& supers : pool.comp_supers_) {
        std::sort(supers.begin(), supers.end());
        supers.erase(std::unique(supers.begin(), supers.end()), supers.end());
    }
    return pool;
}

double objective(const SampleState& state) {
    if (state.chosen.empty()) throw EmptyStateError();
    return entropy(state.atom_dist) + entropy(state.compound_dist);
}

UatRemaining::UatRemaining(const SamplerPool& pool)
    : pool_(&pool),
      remaining_(pool.template_count(), 0),
      alive_(pool.size(), true),
      total_(pool.size()) {
    for (std::uint32_t tid = 0; tid < pool.template_count(); ++tid)
        remaining_[tid] = pool.template_members(tid).size();
    live_ = pool.template_count();
}

void UatRemaining::remove(std::size_t example_id) {
    if (!alive_[example_id]) return;
    alive_[example_id] = false;
    std::uint32_t tid = pool_->template_of(example_id);
    --remaining_[tid];
    --total_;
    if (remaining_[tid] == 0) --live_;
}

double uat_probability(const SamplerPool& pool, const UatRemaining& remaining,
                       std::size_t example_id, double alpha) {
    std::uint32_t tid = pool.template_of(example_id);
    if (remaining.remaining(tid) == 0) throw ExhaustedTemplateError(pool.template_text(tid));
    double norm = 0.0;
    for (std::uint32_t t = 0; t < pool.template_count(); ++t)
        if (remaining.remaining(t) > 0) norm += std::pow(pool.template_probability(t), alpha);
    double share = std::pow(pool.template_probability(tid), alpha) / norm;
    return share / static_cast<double>(remaining.remaining(tid));
}

SampleState sample_uniform(const SamplerPool& pool, std::size_t n, std::uint64_t seed) {
    require_pool(pool, n);
    Rng rng = Rng::stream(seed, "uniform");
    return finalize(pool, rng.sample_indices(pool.size(), n));
}

SampleState sample_uat(const SamplerPool& pool, std::size_t n, double alpha, std::uint64_t seed) {
    require_pool(pool, n);
    Rng rng = Rng::stream(seed, "uat");

    std::vector<double> weights(pool.template_count());
    for (std::uint32_t tid = 0; tid < pool.template_count(); ++tid)
        weights[tid] = std::pow(pool.template_probability(tid), alpha);
    WeightedIndex index(weights);

    std::vector<std::vector<std::uint32_t>> left(pool.template_count());
    for (std::uint32_t tid = 0; tid < pool.template_count(); ++tid)
        left[tid] = pool.template_members(tid);

    std::vector<std::size_t> chosen;
    chosen.reserve(n);
    for (std::size_t step = 0; step < n; ++step) {
        std::uint32_t tid = static_cast<std::uint32_t>(index.pick(rng.real01() * index.total()));
        std::vector<std::uint32_t>& members = left[tid];
        std::size_t at = static_cast<std::size_t>(rng.below(members.size()));
        chosen.push_back(members[at]);
        members[at] = members.back();
        members.pop_back();
        if (members.empty()) index.clear(tid);
    }
    return finalize(pool, std::move(chosen));
}

SampleState sample_cmaxent(const SamplerPool& pool, std::size_t n, std::uint64_t seed,
                           std::optional<std::size_t> candidate_cap) {
    require_pool(pool, n);
    if (!pool.has_candidates())
        throw SamplingError("pool was built without the candidate layer");
    GreedyScratch scratch(pool);
    Rng pick_rng = Rng::stream(seed, "greedy-pick");
    Rng cap_rng = Rng::stream(seed, "greedy-cap");

    std::vector<std::size_t> chosen;
    chosen.reserve(n);
    std::vector<std::uint32_t> scan;
    for (std::size_t step = 0; step < n; ++step) {
        if (candidate_cap && scratch.live.size() > *candidate_cap) {
            scan = subsample_scan(scratch.live, *candidate_cap, cap_rng);
            chosen.push_back(scratch.greedy_step(scan, pick_rng));
        } else {
            chosen.push_back(scratch.greedy_step(scratch.live, pick_rng));
        }
    }
    return finalize(pool, std::move(chosen));
}

SampleState sample_hybrid(const SamplerPool& pool, std::size_t n, std::uint64_t seed,
                          std::optional<std::size_t> candidate_cap) {
    require_pool(pool, n);
    if (!pool.has_candidates())
        throw SamplingError("pool was built without the candidate layer");
    GreedyScratch scratch(pool);
    Rng template_rng = Rng::stream(seed, "hybrid-template");
    Rng pick_rng = Rng::stream(seed, "greedy-pick");
    Rng cap_rng = Rng::stream(seed, "greedy-cap");

    std::vector<std::uint32_t> live_templates;
    std::vector<std::size_t> template_left(pool.template_count());
    for (std::uint32_t tid = 0; tid < pool.template_count(); ++tid) {
        template_left[tid] = pool.template_members(tid).size();
        if (template_left[tid] > 0) live_templates.push_back(tid);
    }

    std::vector<std::size_t> chosen;
    chosen.reserve(n);
    std::vector<std::uint32_t> scan;
    for (std::size_t step = 0; step < n; ++step) {
        std::uint32_t tid =
            live_templates[static_cast<std::size_t>(template_rng.below(live_templates.size()))];
        scan.clear();
        for (std::uint32_t cid : pool.template_candidates(tid))
            if (!scratch.left[cid].empty()) scan.push_back(cid);
        if (candidate_cap && scan.size() > *candidate_cap)
            scan = subsample_scan(scan, *candidate_cap, cap_rng);
        chosen.push_back(scratch.greedy_step(scan, pick_rng));
        if (--template_left[tid] == 0) {
            auto it = std::lower_bound(live_templates.begin(), live_templates.end(), tid);
            live_templates.erase(it);
        }
    }
    return finalize(pool, std::move(chosen));
}

SampleState run_sampler(const SamplerPool& pool, const SamplerConfig& config) {
    config.validate();
    switch (config.method) {
        case SampleMethod::Uniform: return sample_uniform(pool, config.size, config.seed);
        case SampleMethod::Uat:
            return sample_uat(pool, config.size, *config.alpha, config.seed);
        case SampleMethod::CMaxEnt:
            return sample_cmaxent(pool, config.size, config.seed, config.candidate_cap);
        case SampleMethod::Hybrid:
            return sample_hybrid(pool, config.size, config.seed, config.candidate_cap);
    }
    throw ConfigError("method: unknown sampling method");
}

}  // namespace divsamp
