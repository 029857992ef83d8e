#ifndef DIVSAMP_SCFG_HPP
#define DIVSAMP_SCFG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "divsamp/example.hpp"
#include "divsamp/schema.hpp"

namespace divsamp {

/// One synchronized production. Both sides are token sequences where a token
/// of the form $N:NT is a slot: slot N expands the nonterminal NT identically
/// on the natural-language and query sides. The nonterminal multisets of the
/// two sides must be identical (each index once per side, same NT).
struct SyncRule {
    struct Part {
        std::string text;  // terminal text, or nonterminal name when slot >= 0
        int slot = -1;     // 1-based slot index, -1 for terminals
    };

    std::string lhs;
    std::vector<Part> nl;
    std::vector<Part> query;
    double weight = 1.0;
};

/// Parse one side of a rule ("how many $1:TE are there").
std::vector<SyncRule::Part> parse_rule_side(const std::string& text);

/// Throws InvalidRuleError on slot mismatches or non-positive weights.
void validate_rules(const std::vector<SyncRule>& rules);

/// Grammar file: JSON {"rules": [{lhs, nl, query, weight}, ...]}. The start
/// symbol is the lhs of the first rule.
std::vector<SyncRule> parse_grammar(const std::string& json_text);
std::vector<SyncRule> load_grammar(const std::string& path);

/// Schema-driven grammar covering every query construct: filters with the
/// full operator set, boolean combinations, count predicates, contains,
/// aggregates and sorts, each with several NL phrasings.
std::vector<SyncRule> default_grammar(const Schema& schema);

struct GenConfig {
    int max_depth = 6;
    std::size_t max_examples = 50000;
    std::size_t per_depth_cap = 0;  // 0: derived from max_examples
    std::uint64_t seed = 0;
};

/// Breadth-first synchronized expansion from the start symbol with per-depth
/// seeded subsampling; emitted queries are canonicalized, validated against
/// the schema and deduplicated on (utterance, query).
std::vector<Example> expand(const Schema& schema, const std::vector<SyncRule>& rules,
                            const GenConfig& config);

/// Like expand, additionally reporting each example's derivation depth.
struct GenResult {
    std::vector<Example> examples;
    std::vector<int> depths;
};
GenResult expand_detailed(const Schema& schema, const std::vector<SyncRule>& rules,
                          const GenConfig& config);

}  // namespace divsamp

#endif  // DIVSAMP_SCFG_HPP
