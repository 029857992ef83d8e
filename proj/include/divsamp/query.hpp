#ifndef DIVSAMP_QUERY_HPP
#define DIVSAMP_QUERY_HPP

#include <optional>
#include <string>
#include <vector>

#include "divsamp/schema.hpp"

namespace divsamp {

enum class TokenCategory {
    Entity,
    Table,
    Property,
    TypeName,
    Operator,
    Function,
    Modifier,
    Punct,
    Keyword
};

struct Token {
    std::string text;
    TokenCategory category = TokenCategory::Entity;
    bool operator==(const Token&) const = default;
};

enum class NodeKind { Query, TableExpr, Filter, Predicate, PredAtom, Aggregate, Sort, PropRef, Value };

const char* node_kind_name(NodeKind kind);

/// AST of the mini query language. Leaves carry exactly one token (kind
/// Value); internal nodes carry none. Introducer keywords, parentheses and
/// the prop:type colon are surface syntax reconstructed by render_query.
struct ParseTree {
    NodeKind kind = NodeKind::Value;
    std::vector<ParseTree> children;
    std::optional<Token> token;

    bool is_leaf() const { return token.has_value(); }
    bool operator==(const ParseTree&) const = default;

    static ParseTree leaf(std::string text, TokenCategory category) {
        ParseTree t;
        t.token = Token{std::move(text), category};
        return t;
    }
    static ParseTree node(NodeKind kind, std::vector<ParseTree> children) {
        ParseTree t;
        t.kind = kind;
        t.children = std::move(children);
        return t;
    }
};

/// Parse a whitespace-tokenizable query against a schema. Abstract placeholder
/// tokens (entity, @table, property, type, op, func, func_mod) are admitted at
/// their respective positions, which keeps entity-abstracted queries and
/// rendered templates parseable.
ParseTree parse_query(const std::string& text, const Schema& schema);

/// Canonical surface form: single-space joined, prop:type glued.
/// parse_query(render_query(t)) == t for every parser-produced tree.
std::string render_query(const ParseTree& tree);

/// Edges on the longest root-to-leaf path; a single leaf has height 0.
int tree_height(const ParseTree& tree);

}  // namespace divsamp

#endif  // DIVSAMP_QUERY_HPP
