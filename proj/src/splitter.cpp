#include "divsamp/splitter.hpp"

#include <algorithm>
#include <cmath>

#include "divsamp/abstraction.hpp"
#include "divsamp/errors.hpp"
#include "divsamp/rng.hpp"

namespace divsamp {

namespace {

std::vector<std::string> template_per_example(std::span<const Example> examples,
                                              const Schema& schema) {
    std::vector<std::string> out;
    out.reserve(examples.size());
    for (std::size_t i = 0; i < examples.size(); ++i) {
        try {
            out.push_back(abstract_template(parse_query(examples[i].query, schema)).text);
        } catch (const DataError& e) {
            throw DataError("example " + std::to_string(i) + ": " + e.what());
        }
    }
    return out;
}

void subsample_sorted(std::vector<std::size_t>& ids, std::size_t cap, Rng& rng) {
    if (ids.size() <= cap) return;
    std::vector<std::size_t> keep = rng.sample_indices(ids.size(), cap);
    std::sort(keep.begin(), keep.end());
    std::vector<std::size_t> out;
    out.reserve(cap);
    for (std::size_t k : keep) out.push_back(ids[k]);
    ids = std::move(out);
}

}  // namespace

void SplitRatios::validate() const {
    for (double r : {train, dev, test})
        if (!(r > 0.0 && r < 1.0)) throw ConfigError("ratios: each ratio must be in (0,1)");
    if (std::abs(train + dev + test - 1.0) > 1e-9)
        throw ConfigError("ratios: must sum to 1");
}

TemplatePartition partition_templates(std::span<const Example> annotated, const Schema& schema,
                                      const SplitRatios& ratios, std::uint64_t seed) {
    ratios.validate();
    if (annotated.empty()) throw DegenerateCorpusError(0);

    TemplateIndex index = TemplateIndex::build(annotated, schema);
    if (index.entries.size() < 3) throw DegenerateCorpusError(index.entries.size());

    std::vector<std::size_t> order(index.entries.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng = Rng::stream(seed, "partition-shuffle");
    rng.shuffle(order);

    const double total = static_cast<double>(annotated.size());
    const double targets[3] = {ratios.train, ratios.dev, ratios.test};
    double masses[3] = {0.0, 0.0, 0.0};
    TemplatePartition part;
    std::set<std::string>* bins[3] = {&part.train_templates, &part.dev_templates,
                                      &part.test_templates};
    for (std::size_t idx : order) {
        const TemplateIndex::Entry& entry = index.entries[idx];
        int best = 0;
        double best_deficit = targets[0] - masses[0] / total;
        for (int b = 1; b < 3; ++b) {
            double deficit = targets[b] - masses[b] / total;
            if (deficit > best_deficit) {
                best = b;
                best_deficit = deficit;
            }
        }
        bins[best]->insert(entry.tmpl);
        masses[best] += static_cast<double>(entry.members.size());
    }
    return part;
}

SplitManifest compositional_split(std::span<const Example> annotated, const Schema& schema,
                                  const TemplatePartition& partition, const SplitRatios& iid_ratios,
                                  std::uint64_t seed) {
    iid_ratios.validate();
    std::vector<std::string> templates = template_per_example(annotated, schema);

    SplitManifest manifest;
    manifest.partition = partition;
    manifest.seed = seed;

    std::vector<std::size_t> rest;
    for (std::size_t i = 0; i < annotated.size(); ++i) {
        if (partition.dev_templates.count(templates[i])) {
            manifest.comp_dev.push_back(i);
        } else if (partition.test_templates.count(templates[i])) {
            manifest.comp_test.push_back(i);
        } else if (partition.train_templates.count(templates[i])) {
            rest.push_back(i);
        } else {
            throw ConfigError("partition does not cover template: " + templates[i]);
        }
    }

    Rng rng = Rng::stream(seed, "iid-shuffle");
    rng.shuffle(rest);
    const std::size_t n = rest.size();
    const double want[3] = {iid_ratios.train * n, iid_ratios.dev * n, iid_ratios.test * n};
    std::size_t counts[3];
    for (int b = 0; b < 3; ++b) counts[b] = static_cast<std::size_t>(want[b]);
    // largest-remainder rounding, ties resolved train > dev > test
    while (counts[0] + counts[1] + counts[2] < n) {
        int best = 0;
        double best_frac = -1.0;
        for (int b = 0; b < 3; ++b) {
            double frac = want[b] - static_cast<double>(counts[b]);
            if (frac > best_frac + 1e-12) {
                best = b;
                best_frac = frac;
            }
        }
        ++counts[best];
    }

    std::size_t at = 0;
    for (std::size_t k = 0; k < counts[0]; ++k) manifest.train.push_back(rest[at++]);
    for (std::size_t k = 0; k < counts[1]; ++k) manifest.iid_dev.push_back(rest[at++]);
    for (std::size_t k = 0; k < counts[2]; ++k) manifest.iid_test.push_back(rest[at++]);
    std::sort(manifest.train.begin(), manifest.train.end());
    std::sort(manifest.iid_dev.begin(), manifest.iid_dev.end());
    std::sort(manifest.iid_test.begin(), manifest.iid_test.end());

    if (manifest.train.empty()) throw EmptyBinError("train");
    if (manifest.iid_dev.empty()) throw EmptyBinError("iid_dev");
    if (manifest.iid_test.empty()) throw EmptyBinError("iid_test");
    if (manifest.comp_dev.empty()) throw EmptyBinError("comp_dev");
    if (manifest.comp_test.empty()) throw EmptyBinError("comp_test");
    return manifest;
}

SyntheticAssignment assign_synthetic(std::span<const Example> pool, const Schema& schema,
                                     const TemplatePartition& partition, std::size_t eval_cap,
                                     std::uint64_t seed) {
    if (eval_cap == 0) throw ConfigError("eval-cap: must be positive");
    std::vector<std::string> templates = template_per_example(pool, schema);

    SyntheticAssignment out;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (partition.dev_templates.count(templates[i])) {
            out.comp_dev.push_back(i);
        } else if (partition.test_templates.count(templates[i])) {
            out.comp_test.push_back(i);
        } else {
            out.train.push_back(i);  // train templates and novel templates
        }
    }
    Rng dev_rng = Rng::stream(seed, "syn-dev-cap");
    Rng test_rng = Rng::stream(seed, "syn-test-cap");
    subsample_sorted(out.comp_dev, eval_cap, dev_rng);
    subsample_sorted(out.comp_test, eval_cap, test_rng);
    return out;
}

}  // namespace divsamp
