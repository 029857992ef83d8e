#include "divsamp/query.hpp"

#include <array>
#include <cctype>

#include "divsamp/errors.hpp"

namespace divsamp {

namespace {

bool starts_quote(const std::string& t) {
    return t.size() >= 2 && t[0] == '\'' && t[1] == '\'';
}

bool ends_quote(const std::string& t) {
    return t.size() >= 4 && t[t.size() - 1] == '\'' && t[t.size() - 2] == '\'';
}

bool is_quoted(const std::string& t) { return starts_quote(t) && ends_quote(t); }

bool is_number(const std::string& t) {
    std::size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
    if (i == t.size()) return false;
    bool dot = false;
    for (; i < t.size(); ++i) {
        if (t[i] == '.') {
            if (dot) return false;
            dot = true;
        } else if (!std::isdigit(static_cast<unsigned char>(t[i]))) {
            return false;
        }
    }
    return true;
}

bool is_ident(const std::string& t) {
    if (t.empty() || !(std::isalpha(static_cast<unsigned char>(t[0])) || t[0] == '_')) return false;
    for (char c : t)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
    return true;
}

bool is_cmp(const std::string& t) {
    static const std::array<const char*, 6> ops = {"==", "!=", ">=", "<=", ">", "<"};
    for (const char* o : ops)
        if (t == o) return true;
    return t == "op";  // abstract placeholder
}

bool is_function(const std::string& t) {
    return t == "count" || t == "sum" || t == "avg" || t == "min" || t == "max" || t == "func";
}

bool is_modifier(const std::string& t) { return t == "asc" || t == "desc" || t == "func_mod"; }

// Whitespace split, then rejoin ''quoted entities'' and split prop:type pairs
// into [prop, ":", type] so PropRef keeps exactly two leaf children.
std::vector<std::string> lex(const std::string& text) {
    std::vector<std::string> raw;
    std::size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        std::size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) raw.push_back(text.substr(start, i - start));
    }

    std::vector<std::string> out;
    for (std::size_t k = 0; k < raw.size(); ++k) {
        std::string tok = raw[k];
        if (starts_quote(tok) && !is_quoted(tok)) {
            while (k + 1 < raw.size() && !ends_quote(tok)) { tok += " " + raw[++k]; }
            if (!ends_quote(tok)) throw SyntaxError("unterminated quoted entity", out.size());
            out.push_back(tok);
            continue;
        }
        if (is_quoted(tok) || tok[0] == '@') {
            out.push_back(tok);
            continue;
        }
        std::size_t colon = tok.find(':');
        if (colon != std::string::npos && colon > 0) {
            out.push_back(tok.substr(0, colon));
            out.push_back(":");
            if (colon + 1 < tok.size()) out.push_back(tok.substr(colon + 1));
        } else {
            out.push_back(tok);
        }
    }
    return out;
}

class Parser {
  public:
    Parser(std::vector<std::string> toks, const Schema& schema)
        : toks_(std::move(toks)), schema_(schema) {}

    ParseTree run() {
        ParseTree root = ParseTree::node(NodeKind::Query, {parse_expr()});
        if (!at_end()) throw SyntaxError("unexpected token '" + peek() + "'", pos_);
        return root;
    }

  private:
    bool at_end() const { return pos_ >= toks_.size(); }
    const std::string& peek(std::size_t ahead = 0) const {
        static const std::string empty;
        return pos_ + ahead < toks_.size() ? toks_[pos_ + ahead] : empty;
    }
    std::string take() {
        if (at_end()) throw SyntaxError("unexpected end of input", pos_);
        return toks_[pos_++];
    }
    void expect(const std::string& literal) {
        if (at_end() || toks_[pos_] != literal)
            throw SyntaxError("expected '" + literal + "'", pos_);
        ++pos_;
    }

    ParseTree parse_expr() {
        const std::string& t = peek();
        if (t == "sort") {
            ++pos_;
            ParseTree prop = parse_prop_ref();
            ParseTree mod = parse_modifier();
            expect("of");
            return ParseTree::node(NodeKind::Sort, {std::move(prop), std::move(mod), parse_arg()});
        }
        if (t == "aggregate") {
            ++pos_;
            ParseTree func = parse_function();
            expect("of");
            return ParseTree::node(NodeKind::Aggregate, {std::move(func), parse_arg()});
        }
        // collapsed template forms: `func ( ... )` and `func func_mod ( ... )`
        if (is_function(t) && peek(1) == "(") {
            ParseTree func = parse_function();
            return ParseTree::node(NodeKind::Aggregate, {std::move(func), parse_arg()});
        }
        if (is_function(t) && is_modifier(peek(1))) {
            ParseTree func = parse_function();
            ParseTree mod = parse_modifier();
            return ParseTree::node(NodeKind::Sort, {std::move(func), std::move(mod), parse_arg()});
        }
        if (t == "(") return parse_table_chain();
        throw SyntaxError("expected a query", pos_);
    }

    // A table expression (with its own parens) or a parenthesized query.
    ParseTree parse_arg() {
        if (peek() == "(" && !peek(1).empty() && peek(1)[0] == '@') return parse_table_chain();
        expect("(");
        ParseTree inner = parse_expr();
        expect(")");
        return inner;
    }

    ParseTree parse_table_chain() {
        expect("(");
        std::string name = take();
        if (name.empty() || name[0] != '@') throw SyntaxError("expected @table", pos_ - 1);
        if (name != "@table" && !schema_.has_table(name.substr(1)))
            throw UnknownSymbolError(name, pos_ - 1);
        expect(")");
        ParseTree node = ParseTree::node(
            NodeKind::TableExpr, {ParseTree::leaf(std::move(name), TokenCategory::Table)});
        while (peek() == "filter") {
            ++pos_;
            ParseTree pred = parse_predicate();
            node = ParseTree::node(NodeKind::Filter, {std::move(node), std::move(pred)});
        }
        return node;
    }

    ParseTree parse_predicate() {
        ParseTree left = parse_conjunction();
        while (peek() == "or") {
            ++pos_;
            ParseTree op = ParseTree::leaf("or", TokenCategory::Operator);
            ParseTree right = parse_conjunction();
            left = ParseTree::node(NodeKind::Predicate,
                                   {std::move(left), std::move(op), std::move(right)});
        }
        return left;
    }

    // The "op" placeholder is also accepted as a connective so rendered
    // templates (where and/or abstract to op) stay parseable.
    ParseTree parse_conjunction() {
        ParseTree left = parse_pred_atom();
        while (peek() == "and" || peek() == "op") {
            ParseTree op = ParseTree::leaf(take(), TokenCategory::Operator);
            ParseTree right = parse_pred_atom();
            left = ParseTree::node(NodeKind::Predicate,
                                   {std::move(left), std::move(op), std::move(right)});
        }
        return left;
    }

    ParseTree parse_pred_atom() {
        const std::string& t = peek();
        if (t == "not" || (t == "op" && peek(1) == "(")) {
            TokenCategory cat = t == "not" ? TokenCategory::Keyword : TokenCategory::Operator;
            ParseTree kw = ParseTree::leaf(take(), cat);
            expect("(");
            ParseTree pred = parse_predicate();
            expect(")");
            return ParseTree::node(NodeKind::PredAtom, {std::move(kw), std::move(pred)});
        }
        if (is_function(t) && peek(1) == "(") {
            ParseTree func = parse_function();
            expect("(");
            ParseTree prop = parse_prop_ref();
            expect(")");
            ParseTree op = parse_cmp();
            ParseTree value = parse_count_value();
            return ParseTree::node(
                NodeKind::PredAtom,
                {std::move(func), std::move(prop), std::move(op), std::move(value)});
        }
        ParseTree prop = parse_prop_ref();
        if (peek() == "contains") {
            ++pos_;
            ParseTree kw = ParseTree::leaf("contains", TokenCategory::Keyword);
            ParseTree value = parse_value();
            return ParseTree::node(NodeKind::PredAtom,
                                   {std::move(prop), std::move(kw), std::move(value)});
        }
        ParseTree op = parse_cmp();
        ParseTree value = parse_value();
        return ParseTree::node(NodeKind::PredAtom,
                               {std::move(prop), std::move(op), std::move(value)});
    }

    ParseTree parse_prop_ref() {
        std::size_t at = pos_;
        std::string name = take();
        if (!is_ident(name)) throw SyntaxError("expected property name", at);
        if (name != "property" && !schema_.has_property(name)) throw UnknownSymbolError(name, at);
        expect(":");
        std::size_t at_type = pos_;
        std::string type = take();
        if (type != "type") {
            if (!schema_.has_type(type)) throw UnknownSymbolError(type, at_type);
            if (name != "property") {
                const std::vector<std::string>* declared = schema_.property_types(name);
                bool ok = false;
                for (const std::string& d : *declared)
                    if (d == type) ok = true;
                if (!ok)
                    throw TypeMismatchError(
                        "property '" + name + "' is not declared with type '" + type + "'",
                        at_type);
            }
        }
        return ParseTree::node(NodeKind::PropRef,
                               {ParseTree::leaf(std::move(name), TokenCategory::Property),
                                ParseTree::leaf(std::move(type), TokenCategory::TypeName)});
    }

    ParseTree parse_function() {
        std::size_t at = pos_;
        std::string t = take();
        if (!is_function(t)) throw SyntaxError("expected function", at);
        return ParseTree::leaf(std::move(t), TokenCategory::Function);
    }

    ParseTree parse_modifier() {
        std::size_t at = pos_;
        std::string t = take();
        if (!is_modifier(t)) throw SyntaxError("expected sort modifier", at);
        return ParseTree::leaf(std::move(t), TokenCategory::Modifier);
    }

    ParseTree parse_cmp() {
        std::size_t at = pos_;
        std::string t = take();
        if (!is_cmp(t)) throw SyntaxError("expected comparison operator", at);
        return ParseTree::leaf(std::move(t), TokenCategory::Operator);
    }

    ParseTree parse_value() {
        std::size_t at = pos_;
        std::string t = take();
        if (is_number(t) || t == "true" || t == "false" || is_quoted(t) || t == "entity" ||
            schema_.is_lexicon_value(t))
            return ParseTree::leaf(std::move(t), TokenCategory::Entity);
        throw UnknownSymbolError(t, at);
    }

    ParseTree parse_count_value() {
        std::size_t at = pos_;
        std::string t = take();
        if (is_number(t) || t == "entity")
            return ParseTree::leaf(std::move(t), TokenCategory::Entity);
        throw SyntaxError("expected a number", at);
    }

    std::vector<std::string> toks_;
    const Schema& schema_;
    std::size_t pos_ = 0;
};

void render_node(const ParseTree& t, std::string& out);

void render_arg(const ParseTree& e, std::string& out) {
    if (e.kind == NodeKind::TableExpr || e.kind == NodeKind::Filter) {
        render_node(e, out);
    } else {
        out += "( ";
        render_node(e, out);
        out += " )";
    }
}

void render_node(const ParseTree& t, std::string& out) {
    if (t.is_leaf()) {
        out += t.token->text;
        return;
    }
    switch (t.kind) {
        case NodeKind::Query:
            render_node(t.children.at(0), out);
            break;
        case NodeKind::TableExpr:
            out += "( " + t.children.at(0).token->text + " )";
            break;
        case NodeKind::Filter:
            render_node(t.children.at(0), out);
            out += " filter ";
            render_node(t.children.at(1), out);
            break;
        case NodeKind::Predicate:
            render_node(t.children.at(0), out);
            out += " " + t.children.at(1).token->text + " ";
            render_node(t.children.at(2), out);
            break;
        case NodeKind::PredAtom:
            if (t.children.size() == 2) {  // not ( predicate )
                out += t.children[0].token->text + " ( ";
                render_node(t.children[1], out);
                out += " )";
            } else if (t.children.size() == 4) {  // count ( prop:type ) op value
                out += t.children[0].token->text + " ( ";
                render_node(t.children[1], out);
                out += " ) " + t.children[2].token->text + " " + t.children[3].token->text;
            } else {
                render_node(t.children.at(0), out);
                out += " " + t.children.at(1).token->text + " " + t.children.at(2).token->text;
            }
            break;
        case NodeKind::PropRef:
            out += t.children.at(0).token->text + ":" + t.children.at(1).token->text;
            break;
        case NodeKind::Aggregate:
            out += "aggregate " + t.children.at(0).token->text + " of ";
            render_arg(t.children.at(1), out);
            break;
        case NodeKind::Sort:
            out += "sort ";
            render_node(t.children.at(0), out);
            out += " " + t.children.at(1).token->text + " of ";
            render_arg(t.children.at(2), out);
            break;
        case NodeKind::Value:
            out += t.token->text;
            break;
    }
}

}  // namespace

const char* node_kind_name(NodeKind kind) {
    switch (kind) {
        case NodeKind::Query: return "Query";
        case NodeKind::TableExpr: return "TableExpr";
        case NodeKind::Filter: return "Filter";
        case NodeKind::Predicate: return "Predicate";
        case NodeKind::PredAtom: return "PredAtom";
        case NodeKind::Aggregate: return "Aggregate";
        case NodeKind::Sort: return "Sort";
        case NodeKind::PropRef: return "PropRef";
        case NodeKind::Value: return "Value";
    }
    return "?";
}

ParseTree parse_query(const std::string& text, const Schema& schema) {
    return Parser(lex(text), schema).run();
}

std::string render_query(const ParseTree& tree) {
    std::string out;
    render_node(tree, out);
    return out;
}

int tree_height(const ParseTree& tree) {
    if (tree.is_leaf()) return 0;
    int best = 0;
    for (const ParseTree& c : tree.children) best = std::max(best, 1 + tree_height(c));
    return best;
}

}  // namespace divsamp
