#include "divsamp/abstraction.hpp"

#include <algorithm>

#include "divsamp/errors.hpp"

namespace divsamp {

namespace {

// Category placeholders. Keyword leaves (contains, not) act as
// comparison operators and abstract to "op".
std::string abstract_leaf(const Token& tok) {
    switch (tok.category) {
        case TokenCategory::Entity: return "entity";
        case TokenCategory::Table: return "@table";
        case TokenCategory::Property: return "property";
        case TokenCategory::TypeName: return "type";
        case TokenCategory::Operator: return "op";
        case TokenCategory::Function: return "func";
        case TokenCategory::Modifier: return "func_mod";
        case TokenCategory::Keyword: return "op";
        case TokenCategory::Punct: return tok.text;
    }
    return tok.text;
}

void abstract_node(const ParseTree& t, std::string& out);

void abstract_arg(const ParseTree& e, std::string& out) {
    if (e.kind == NodeKind::TableExpr || e.kind == NodeKind::Filter) {
        abstract_node(e, out);
    } else {
        out += "( ";
        abstract_node(e, out);
        out += " )";
    }
}

void abstract_node(const ParseTree& t, std::string& out) {
    if (t.is_leaf()) {
        out += abstract_leaf(*t.token);
        return;
    }
    switch (t.kind) {
        case NodeKind::Query:
            abstract_node(t.children.at(0), out);
            break;
        case NodeKind::TableExpr:
            out += "( @table )";
            break;
        case NodeKind::Filter:
            abstract_node(t.children.at(0), out);
            out += " filter ";
            abstract_node(t.children.at(1), out);
            break;
        case NodeKind::Predicate:
            abstract_node(t.children.at(0), out);
            out += " op ";
            abstract_node(t.children.at(2), out);
            break;
        case NodeKind::PredAtom:
            if (t.children.size() == 2) {  // not-form
                out += "op ( ";
                abstract_node(t.children[1], out);
                out += " )";
            } else if (t.children.size() == 4) {  // count-form
                out += "func ( ";
                abstract_node(t.children[1], out);
                out += " ) " + abstract_leaf(*t.children[2].token) + " " +
                       abstract_leaf(*t.children[3].token);
            } else {
                abstract_node(t.children.at(0), out);
                out += " " + abstract_leaf(*t.children.at(1).token) + " " +
                       abstract_leaf(*t.children.at(2).token);
            }
            break;
        case NodeKind::PropRef:
            out += "property:type";
            break;
        // Introducer keywords collapse: aggregates become `func ( ... )`,
        // sorts become `func func_mod ( ... )` with the prop ref folded away.
        case NodeKind::Aggregate:
            out += "func ";
            abstract_arg(t.children.at(1), out);
            break;
        case NodeKind::Sort:
            out += "func func_mod ";
            abstract_arg(t.children.at(2), out);
            break;
        case NodeKind::Value:
            out += abstract_leaf(*t.token);
            break;
    }
}

}  // namespace

AbstractTemplate abstract_template(const ParseTree& tree) {
    std::string out;
    abstract_node(tree, out);
    return AbstractTemplate{std::move(out)};
}

ParseTree abstract_entities_tree(const ParseTree& tree) {
    ParseTree copy = tree;
    if (copy.is_leaf()) {
        if (copy.token->category == TokenCategory::Entity) copy.token->text = "entity";
        return copy;
    }
    for (ParseTree& c : copy.children) c = abstract_entities_tree(c);
    return copy;
}

EntityAbstractQuery abstract_entities(const ParseTree& tree) {
    return EntityAbstractQuery{render_query(abstract_entities_tree(tree))};
}

const TemplateIndex::Entry* TemplateIndex::find(const std::string& tmpl) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), tmpl,
                               [](const Entry& e, const std::string& t) { return e.tmpl < t; });
    return it != entries.end() && it->tmpl == tmpl ? &*it : nullptr;
}

TemplateIndex TemplateIndex::build(std::span<const Example> pool, const Schema& schema) {
    std::map<std::string, std::vector<std::size_t>> buckets;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        try {
            buckets[abstract_template(parse_query(pool[i].query, schema)).text].push_back(i);
        } catch (const DataError& e) {
            throw DataError("example " + std::to_string(i) + ": " + e.what());
        }
    }
    TemplateIndex index;
    index.total = pool.size();
    for (auto& [tmpl, members] : buckets) {
        Entry e;
        e.tmpl = tmpl;
        e.members = std::move(members);
        e.probability = static_cast<double>(e.members.size()) / static_cast<double>(pool.size());
        index.entries.push_back(std::move(e));
    }
    return index;
}

AbstractTemplate template_of(const std::string& query, const Schema& schema) {
    return abstract_template(parse_query(query, schema));
}

}  // namespace divsamp
