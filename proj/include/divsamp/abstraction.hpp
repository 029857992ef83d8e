#ifndef DIVSAMP_ABSTRACTION_HPP
#define DIVSAMP_ABSTRACTION_HPP

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "divsamp/example.hpp"
#include "divsamp/query.hpp"

namespace divsamp {

/// Coarse structural signature of a query: every domain-specific token
/// replaced by its category placeholder. Equality is string equality.
struct AbstractTemplate {
    std::string text;
    bool operator==(const AbstractTemplate&) const = default;
    auto operator<=>(const AbstractTemplate&) const = default;
};

/// Query with only entity tokens replaced by "entity"; still parseable.
struct EntityAbstractQuery {
    std::string text;
    bool operator==(const EntityAbstractQuery&) const = default;
    auto operator<=>(const EntityAbstractQuery&) const = default;
};

AbstractTemplate abstract_template(const ParseTree& tree);

/// Copy of the tree with Entity leaves rewritten to "entity".
ParseTree abstract_entities_tree(const ParseTree& tree);
EntityAbstractQuery abstract_entities(const ParseTree& tree);

/// Template -> members/count/probability over a pool. Buckets partition the
/// pool; member lists are ordered by example id; probabilities sum to 1.
struct TemplateIndex {
    struct Entry {
        std::string tmpl;
        std::vector<std::size_t> members;
        double probability = 0.0;        // c(T) / pool size
        double uniform_member_weight() const {
            return members.empty() ? 0.0 : 1.0 / static_cast<double>(members.size());
        }
    };

    std::vector<Entry> entries;          // sorted by template text
    std::size_t total = 0;

    const Entry* find(const std::string& tmpl) const;
    static TemplateIndex build(std::span<const Example> pool, const Schema& schema);
};

/// abstract_template of a parsed query string.
AbstractTemplate template_of(const std::string& query, const Schema& schema);

}  // namespace divsamp

#endif  // DIVSAMP_ABSTRACTION_HPP
