#ifndef DIVSAMP_SPLITTER_HPP
#define DIVSAMP_SPLITTER_HPP

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "divsamp/example.hpp"
#include "divsamp/schema.hpp"

namespace divsamp {

struct SplitRatios {
    double train = 0.0;
    double dev = 0.0;
    double test = 0.0;

    /// Each ratio in (0,1), sum 1 within 1e-9.
    void validate() const;
};

inline constexpr SplitRatios kDefaultCompRatios{0.70, 0.15, 0.15};
inline constexpr SplitRatios kDefaultIidRatios{0.81, 0.09, 0.10};
inline constexpr std::size_t kDefaultEvalCap = 6000;

struct TemplatePartition {
    std::set<std::string> train_templates;
    std::set<std::string> dev_templates;
    std::set<std::string> test_templates;
};

struct SplitManifest {
    std::vector<std::size_t> train;
    std::vector<std::size_t> iid_dev;
    std::vector<std::size_t> iid_test;
    std::vector<std::size_t> comp_dev;
    std::vector<std::size_t> comp_test;
    TemplatePartition partition;
    std::uint64_t seed = 0;
};

/// Shuffle templates with the seeded generator, then greedily assign each to
/// the bin whose example-mass fraction is furthest below its target.
TemplatePartition partition_templates(std::span<const Example> annotated, const Schema& schema,
                                      const SplitRatios& ratios, std::uint64_t seed);

/// Examples of dev/test templates become comp_dev/comp_test; the remaining
/// examples are split i.i.d. into train / iid_dev / iid_test.
SplitManifest compositional_split(std::span<const Example> annotated, const Schema& schema,
                                  const TemplatePartition& partition, const SplitRatios& iid_ratios,
                                  std::uint64_t seed);

/// Synthetic pool routed by template membership; novel templates go to train;
/// dev/test buckets are downsampled to eval_cap.
struct SyntheticAssignment {
    std::vector<std::size_t> train;
    std::vector<std::size_t> comp_dev;
    std::vector<std::size_t> comp_test;
};

SyntheticAssignment assign_synthetic(std::span<const Example> pool, const Schema& schema,
                                     const TemplatePartition& partition, std::size_t eval_cap,
                                     std::uint64_t seed);

}  // namespace divsamp

#endif  // DIVSAMP_SPLITTER_HPP
