#ifndef DIVSAMP_DIVERSITY_HPP
#define DIVSAMP_DIVERSITY_HPP

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "divsamp/abstraction.hpp"
#include "divsamp/example.hpp"
#include "divsamp/query.hpp"

namespace divsamp {

/// Hole marker used when a compound fragment prunes a subtree.
inline constexpr std::string_view kHoleMarker = "▢";

using Counts = std::map<std::string, std::size_t>;

/// Label -> non-negative weight. `total` is kept equal to the sum of weights.
struct Distribution {
    std::map<std::string, double> entries;
    double total = 0.0;

    void add(const std::string& label, double weight) {
        entries[label] += weight;
        total += weight;
    }
    std::map<std::string, double> normalized() const;
};

/// One atom per tree node: token text for leaves, node kind for internal
/// nodes. Expects an entity-abstracted tree.
Counts extract_atoms(const ParseTree& tree);

/// Rooted fragments of edge-height <= 2 with at least one original terminal
/// and at least two nodes. For every node the tree is truncated at heights 1
/// and 2 with pruned subtrees replaced by the hole marker; fragments that
/// violate the height bound are discarded, and identical fragments from the
/// same node count once.
Counts extract_compounds(const ParseTree& tree);

/// Compound occurrences plus, for each hole-free height-2 fragment, the list
/// of compound signatures its fragment strictly contains. This is the data
/// the super-compound weighting needs.
struct CompoundExtraction {
    Counts occurrences;
    std::map<std::string, std::vector<std::string>> contained;

    void merge(const CompoundExtraction& other);
};

CompoundExtraction extract_compounds_detailed(const ParseTree& tree);

/// Weighted view: each occurrence count scaled by
/// w(c) = clamp(1 - max_{c' superset of c} occ(c')/occ(c), 0.01, 1).
Distribution weight_compounds(const Counts& occ,
                              const std::map<std::string, std::vector<std::string>>& contained);

/// Shannon entropy in bits of the normalized distribution (0 log 0 := 0).
double entropy(const Distribution& dist);

Distribution atom_distribution(std::span<const Example> sample, const Schema& schema);
Distribution weighted_compound_distribution(std::span<const Example> sample, const Schema& schema);

struct DiversityReport {
    std::optional<double> atom_entropy_bits;      // empty sample -> no entropy
    std::optional<double> compound_entropy_bits;
    std::size_t distinct_templates = 0;
    Distribution template_distribution;
};

DiversityReport diversity_report(std::span<const Example> sample, const Schema& schema);

/// Groups of examples identical after entity abstraction. fully_correct
/// counts groups of size >= 2 whose members are all flagged correct.
struct ConsistencyGroups {
    std::vector<std::vector<std::size_t>> groups;
    std::size_t fully_correct = 0;
};

ConsistencyGroups consistency_groups(std::span<const Example> examples, const Schema& schema,
                                     const std::map<std::size_t, bool>& correct);

}  // namespace divsamp

#endif  // DIVSAMP_DIVERSITY_HPP
