#include "divsamp/scfg.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "divsamp/abstraction.hpp"
#include "divsamp/errors.hpp"
#include "divsamp/query.hpp"
#include "divsamp/rng.hpp"
#include "json.hpp"

namespace divsamp {

namespace {

struct Deriv {
    std::string nl;
    std::string query;
};

std::string side_key(const std::string& nl, const std::string& query) {
    return nl + '\x1f' + query;
}

std::string join_parts(const std::vector<SyncRule::Part>& parts,
                       const std::vector<const Deriv*>& children,
                       const std::map<int, std::size_t>& slot_pos, bool query_side) {
    std::string out;
    for (const SyncRule::Part& part : parts) {
        if (!out.empty()) out += ' ';
        if (part.slot < 0) {
            out += part.text;
        } else {
            const Deriv* child = children[slot_pos.at(part.slot)];
            out += query_side ? child->query : child->nl;
        }
    }
    return out;
}

// Slots of a rule in index order, with their nonterminal names.
std::vector<std::pair<int, std::string>> rule_slots(const SyncRule& rule) {
    std::map<int, std::string> slots;
    for (const SyncRule::Part& p : rule.nl)
        if (p.slot >= 0) slots[p.slot] = p.text;
    std::vector<std::pair<int, std::string>> out(slots.begin(), slots.end());
    return out;
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

// camelCase -> "camel case"
std::string phrase_of(const std::string& name) {
    std::string out;
    for (char c : name) {
        if (std::isupper(static_cast<unsigned char>(c)) && !out.empty()) out += ' ';
        out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

std::string noun_of(const std::string& table) { return lower(table) + "s"; }

std::string value_phrase(const std::string& value) {
    if (value.size() >= 4 && value.substr(0, 2) == "''" && value.substr(value.size() - 2) == "''")
        return value.substr(2, value.size() - 4);
    return value;
}

const ParseTree* find_table(const ParseTree& node) {
    if (node.kind == NodeKind::TableExpr) return &node;
    if (node.is_leaf()) return nullptr;
    for (const ParseTree& c : node.children)
        if (const ParseTree* hit = find_table(c)) return hit;
    return nullptr;
}

}  // namespace

std::vector<SyncRule::Part> parse_rule_side(const std::string& text) {
    std::vector<SyncRule::Part> parts;
    std::istringstream in(text);
    std::string tok;
    while (in >> tok) {
        SyncRule::Part part;
        if (tok.size() > 1 && tok[0] == '$') {
            std::size_t colon = tok.find(':');
            if (colon != std::string::npos && colon > 1) {
                bool digits = true;
                for (std::size_t i = 1; i < colon; ++i)
                    digits = digits && std::isdigit(static_cast<unsigned char>(tok[i]));
                if (digits) {
                    part.slot = std::stoi(tok.substr(1, colon - 1));
                    part.text = tok.substr(colon + 1);
                    parts.push_back(std::move(part));
                    continue;
                }
            }
        }
        part.text = tok;
        parts.push_back(std::move(part));
    }
    return parts;
}

void validate_rules(const std::vector<SyncRule>& rules) {
    if (rules.empty()) throw InvalidRuleError("grammar has no rules");
    for (std::size_t r = 0; r < rules.size(); ++r) {
        const SyncRule& rule = rules[r];
        const std::string where = "rule " + std::to_string(r) + " (" + rule.lhs + ")";
        if (rule.lhs.empty()) throw InvalidRuleError(where + ": empty lhs");
        if (!(rule.weight > 0.0)) throw InvalidRuleError(where + ": weight must be positive");
        std::map<int, std::string> nl_slots, q_slots;
        for (const SyncRule::Part& p : rule.nl) {
            if (p.slot < 0) continue;
            if (!nl_slots.emplace(p.slot, p.text).second)
                throw InvalidRuleError(where + ": duplicate slot $" + std::to_string(p.slot) +
                                       " on nl side");
        }
        for (const SyncRule::Part& p : rule.query) {
            if (p.slot < 0) continue;
            if (!q_slots.emplace(p.slot, p.text).second)
                throw InvalidRuleError(where + ": duplicate slot $" + std::to_string(p.slot) +
                                       " on query side");
        }
        if (nl_slots != q_slots)
            throw InvalidRuleError(where + ": nl and query sides disagree on slots");
    }
}

std::vector<SyncRule> parse_grammar(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw InvalidRuleError(std::string("grammar: invalid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("rules") || !doc.at("rules").is_array())
        throw InvalidRuleError("grammar: expected object with field rules[]");
    std::vector<SyncRule> rules;
    for (const auto& r : doc.at("rules")) {
        if (!r.contains("lhs") || !r.contains("nl") || !r.contains("query"))
            throw InvalidRuleError("grammar: rules need fields lhs, nl, query");
        SyncRule rule;
        rule.lhs = r.at("lhs").get<std::string>();
        rule.nl = parse_rule_side(r.at("nl").get<std::string>());
        rule.query = parse_rule_side(r.at("query").get<std::string>());
        rule.weight = r.value("weight", 1.0);
        rules.push_back(std::move(rule));
    }
    validate_rules(rules);
    return rules;
}

std::vector<SyncRule> load_grammar(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("grammar: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_grammar(buf.str());
}

std::vector<SyncRule> default_grammar(const Schema& schema) {
    std::vector<SyncRule> rules;
    auto add = [&rules](const std::string& lhs, const std::string& nl, const std::string& q) {
        SyncRule r;
        r.lhs = lhs;
        r.nl = parse_rule_side(nl);
        r.query = parse_rule_side(q);
        rules.push_back(std::move(r));
    };

    for (const TableDecl& table : schema.tables()) {
        const std::string noun = noun_of(table.name);
        const std::string te = "TE_" + table.name;
        const std::string pa = "PA_" + table.name;
        const std::string s1te = "$1:" + te;

        add("Q", "show me " + s1te, s1te);
        add("Q", "find " + s1te, s1te);
        add("Q", "list all " + s1te, s1te);

        add("Q", "how many " + s1te + " are there", "aggregate count of " + s1te);
        add("Q", "count the " + s1te, "aggregate count of " + s1te);
        add("Q", "what is the number of " + s1te, "aggregate count of " + s1te);
        const std::pair<const char*, const char*> funcs[] = {
            {"sum", "total"}, {"avg", "average"}, {"min", "minimum"}, {"max", "maximum"}};
        for (const auto& [func, word] : funcs) {
            add("Q", std::string("what is the ") + word + " over " + s1te,
                std::string("aggregate ") + func + " of " + s1te);
            add("Q", std::string("compute the ") + word + " over " + s1te,
                std::string("aggregate ") + func + " of " + s1te);
        }

        int sortable = 0;
        for (const PropertyDecl& prop : table.properties) {
            if (prop.type != "Number" || sortable >= 3) continue;
            ++sortable;
            const std::string ph = phrase_of(prop.name);
            const std::string ref = prop.name + ":Number";
            add("Q", "sort " + s1te + " by " + ph + " in ascending order",
                "sort " + ref + " asc of " + s1te);
            add("Q", "sort " + s1te + " by " + ph + " in descending order",
                "sort " + ref + " desc of " + s1te);
            add("Q", "show me " + s1te + " ordered by " + ph + " from lowest",
                "sort " + ref + " asc of " + s1te);
            add("Q", "show me " + s1te + " ordered by " + ph + " from highest",
                "sort " + ref + " desc of " + s1te);
            add("Q", "rank " + s1te + " by " + ph + " upward", "sort " + ref + " asc of " + s1te);
            add("Q", "rank " + s1te + " by " + ph + " downward",
                "sort " + ref + " desc of " + s1te);
        }

        add(te, noun, "( @" + table.name + " )");
        add(te, "all " + noun, "( @" + table.name + " )");
        add(te, "the " + noun, "( @" + table.name + " )");

        const std::string s2pa = "$2:" + pa;
        const std::string s3pa = "$3:" + pa;
        const std::string s4pa = "$4:" + pa;
        add(te, s1te + " that " + s2pa, s1te + " filter " + s2pa);
        add(te, s1te + " which " + s2pa, s1te + " filter " + s2pa);
        add(te, s1te + " where they " + s2pa, s1te + " filter " + s2pa);
        add(te, s1te + " that " + s2pa + " and " + s3pa,
            s1te + " filter " + s2pa + " and " + s3pa);
        add(te, s1te + " which " + s2pa + " and also " + s3pa,
            s1te + " filter " + s2pa + " and " + s3pa);
        add(te, s1te + " that " + s2pa + " or " + s3pa, s1te + " filter " + s2pa + " or " + s3pa);
        add(te, s1te + " which " + s2pa + " or else " + s3pa,
            s1te + " filter " + s2pa + " or " + s3pa);
        add(te, s1te + " that do not " + s2pa, s1te + " filter not ( " + s2pa + " )");
        add(te, s1te + " which never " + s2pa, s1te + " filter not ( " + s2pa + " )");
        add(te, s1te + " that " + s2pa + " but do not " + s3pa,
            s1te + " filter " + s2pa + " and not ( " + s3pa + " )");
        add(te, s1te + " that " + s2pa + " and " + s3pa + " and " + s4pa,
            s1te + " filter " + s2pa + " and " + s3pa + " and " + s4pa);

        for (const PropertyDecl& prop : table.properties) {
            const std::string ph = phrase_of(prop.name);
            const std::string val = "V_" + table.name + "_" + prop.name;
            const std::string s1v = "$1:" + val;
            const std::string ref = prop.name + ":" + prop.type;
            const bool is_array = prop.type.rfind("Array(", 0) == 0;

            if (prop.type == "Boolean") {
                add(pa, "have " + ph, ref + " == true");
                add(pa, "offer " + ph, ref + " == true");
                add(pa, "come with " + ph, ref + " == true");
                add(pa, "lack " + ph, ref + " == false");
                continue;
            }
            if (prop.values.empty()) continue;
            for (const std::string& v : prop.values) add(val, value_phrase(v), v);

            if (prop.type == "Number") {
                add(pa, "have " + ph + " of at least " + s1v, ref + " >= " + s1v);
                add(pa, "have " + ph + " of at most " + s1v, ref + " <= " + s1v);
                add(pa, "have " + ph + " above " + s1v, ref + " > " + s1v);
                add(pa, "have " + ph + " below " + s1v, ref + " < " + s1v);
                add(pa, "have " + ph + " of exactly " + s1v, ref + " == " + s1v);
                add(pa, "have a " + ph + " of " + s1v, ref + " == " + s1v);
                add(pa, "have " + ph + " different from " + s1v, ref + " != " + s1v);
            } else if (prop.type == "Enum") {
                add(pa, "have " + ph + " " + s1v, ref + " == " + s1v);
                add(pa, "come in " + s1v + " " + ph, ref + " == " + s1v);
                add(pa, "have " + ph + " other than " + s1v, ref + " != " + s1v);
            } else if (is_array) {
                add(pa, "include " + s1v + " in their " + ph, ref + " contains " + s1v);
                add(pa, "have " + s1v + " among their " + ph, ref + " contains " + s1v);
                add(pa, "feature " + s1v, ref + " contains " + s1v);
                add(pa, "have at least 2 " + ph, "count ( " + ref + " ) >= 2");
                add(pa, "have at least 3 " + ph, "count ( " + ref + " ) >= 3");
                add(pa, "have exactly 2 " + ph, "count ( " + ref + " ) == 2");
            } else {  // String and named scalar types
                add(pa, "have " + ph + " " + s1v, ref + " == " + s1v);
                add(pa, "list " + ph + " as " + s1v, ref + " == " + s1v);
            }
        }
    }
    validate_rules(rules);
    return rules;
}

GenResult expand_detailed(const Schema& schema, const std::vector<SyncRule>& rules,
                          const GenConfig& config) {
    if (config.max_depth < 1) throw ConfigError("depth: must be >= 1");
    if (config.max_examples < 1) throw ConfigError("max: must be >= 1");
    validate_rules(rules);

    const std::size_t cap = config.per_depth_cap > 0
                                ? config.per_depth_cap
                                : std::max<std::size_t>(4096, config.max_examples / 3);

    // Nonterminal ids in order of first appearance as an lhs.
    std::map<std::string, std::size_t> nt_id;
    std::vector<std::vector<std::size_t>> nt_rules;
    for (std::size_t r = 0; r < rules.size(); ++r) {
        auto [it, inserted] = nt_id.emplace(rules[r].lhs, nt_id.size());
        if (inserted) nt_rules.emplace_back();
        nt_rules[it->second].push_back(r);
    }
    const std::size_t start = 0;  // lhs of the first rule

    std::vector<std::vector<Deriv>> lists(nt_id.size());
    std::vector<std::unordered_set<std::string>> seen(nt_id.size());
    std::vector<std::size_t> prev_size(nt_id.size(), 0);
    std::vector<std::uint64_t> last_count(rules.size(), 0);
    std::vector<std::size_t> start_boundary;  // start-list size after each depth

    Rng rng = Rng::stream(config.seed, "expand");

    for (int depth = 1; depth <= config.max_depth; ++depth) {
        for (std::size_t nt = 0; nt < nt_rules.size(); ++nt) prev_size[nt] = lists[nt].size();

        for (std::size_t nt = 0; nt < nt_rules.size(); ++nt) {
            struct Active {
                std::size_t rule;
                std::vector<std::pair<int, std::string>> slots;
                std::vector<std::size_t> sizes;  // child list sizes, one per slot
                std::uint64_t count = 1;
            };
            std::vector<Active> active;
            std::uint64_t universe = 0;
            for (std::size_t r : nt_rules[nt]) {
                Active a;
                a.rule = r;
                a.slots = rule_slots(rules[r]);
                bool dead = false;
                for (const auto& [slot, child_nt] : a.slots) {
                    auto it = nt_id.find(child_nt);
                    std::size_t size = it == nt_id.end() ? 0 : prev_size[it->second];
                    if (size == 0) dead = true;
                    a.sizes.push_back(size);
                    if (a.count > (1ull << 62) / std::max<std::size_t>(size, 1))
                        throw DataError("grammar: derivation space overflow");
                    a.count *= std::max<std::size_t>(size, 1);
                }
                if (dead || a.count == last_count[r]) continue;
                last_count[r] = a.count;
                universe += a.count;
                active.push_back(std::move(a));
            }
            if (universe == 0) {
                if (nt == start) start_boundary.push_back(lists[start].size());
                continue;
            }

            std::vector<std::uint64_t> picks;
            if (universe <= cap) {
                picks.resize(universe);
                for (std::uint64_t i = 0; i < universe; ++i) picks[i] = i;
            } else {
                std::unordered_set<std::uint64_t> taken;
                taken.reserve(cap * 2);
                while (taken.size() < cap) taken.insert(rng.below(universe));
                picks.assign(taken.begin(), taken.end());
                std::sort(picks.begin(), picks.end());
            }

            for (std::uint64_t pick : picks) {
                std::uint64_t offset = pick;
                const Active* chosen = nullptr;
                for (const Active& a : active) {
                    if (offset < a.count) {
                        chosen = &a;
                        break;
                    }
                    offset -= a.count;
                }
                const SyncRule& rule = rules[chosen->rule];
                std::vector<const Deriv*> children(chosen->slots.size());
                std::map<int, std::size_t> slot_pos;
                std::uint64_t radix = offset;
                for (std::size_t s = 0; s < chosen->slots.size(); ++s) {
                    const std::size_t size = chosen->sizes[s];
                    const std::size_t child_idx = static_cast<std::size_t>(radix % size);
                    radix /= size;
                    children[s] = &lists[nt_id.at(chosen->slots[s].second)][child_idx];
                    slot_pos[chosen->slots[s].first] = s;
                }
                Deriv d;
                d.nl = join_parts(rule.nl, children, slot_pos, false);
                d.query = join_parts(rule.query, children, slot_pos, true);
                if (seen[nt].insert(side_key(d.nl, d.query)).second)
                    lists[nt].push_back(std::move(d));
            }
            if (nt == start) start_boundary.push_back(lists[start].size());
        }
    }

    if (lists[start].empty())
        throw NonProductiveGrammarError("grammar: no complete derivation within depth " +
                                        std::to_string(config.max_depth));

    // Depth buckets of start-symbol completions. Bucket sizes may grow until
    // the largest depth bucket, then are clamped to never exceed the previous
    // bucket, keeping deep structures no more frequent than shallow ones.
    struct Bucket {
        int depth;
        std::size_t begin, end, retained;
    };
    std::vector<Bucket> buckets;
    std::size_t prev_end = 0;
    for (std::size_t d = 0; d < start_boundary.size(); ++d) {
        if (start_boundary[d] > prev_end)
            buckets.push_back({static_cast<int>(d + 1), prev_end, start_boundary[d], 0});
        prev_end = std::max(prev_end, start_boundary[d]);
    }
    std::size_t peak = 0;
    for (std::size_t i = 1; i < buckets.size(); ++i)
        if (buckets[i].end - buckets[i].begin > buckets[peak].end - buckets[peak].begin)
            peak = i;
    for (std::size_t i = 0; i < buckets.size(); ++i) {
        std::size_t avail = buckets[i].end - buckets[i].begin;
        buckets[i].retained = std::min(avail, cap);
        if (i > peak) buckets[i].retained = std::min(buckets[i].retained, buckets[i - 1].retained);
    }
    std::size_t total = 0;
    for (const Bucket& b : buckets) total += b.retained;
    if (total > config.max_examples) {
        const double scale = static_cast<double>(config.max_examples) / static_cast<double>(total);
        for (Bucket& b : buckets)
            b.retained = std::max<std::size_t>(
                1, static_cast<std::size_t>(static_cast<double>(b.retained) * scale));
        while (true) {
            total = 0;
            for (const Bucket& b : buckets) total += b.retained;
            if (total <= config.max_examples) break;
            for (Bucket& b : buckets)
                if (total > config.max_examples && b.retained > 1) {
                    --b.retained;
                    --total;
                }
        }
    }

    Rng assembly = Rng::stream(config.seed, "assembly");
    GenResult result;
    std::unordered_set<std::string> emitted;
    for (const Bucket& b : buckets) {
        std::vector<std::size_t> keep = assembly.sample_indices(b.end - b.begin, b.retained);
        std::sort(keep.begin(), keep.end());
        for (std::size_t k : keep) {
            const Deriv& d = lists[start][b.begin + k];
            std::string canonical;
            std::string domain;
            try {
                ParseTree tree = parse_query(d.query, schema);
                canonical = render_query(tree);
                if (const ParseTree* table = find_table(tree))
                    domain = schema.domain_of_table(table->children[0].token->text.substr(1));
            } catch (const DataError& e) {
                throw DataError("generated query does not parse: " + d.query + ": " + e.what());
            }
            if (!emitted.insert(side_key(d.nl, canonical)).second) continue;
            result.examples.push_back(Example{d.nl, canonical, domain, true});
            result.depths.push_back(b.depth);
        }
    }
    return result;
}

std::vector<Example> expand(const Schema& schema, const std::vector<SyncRule>& rules,
                            const GenConfig& config) {
    return expand_detailed(schema, rules, config).examples;
}

}  // namespace divsamp
