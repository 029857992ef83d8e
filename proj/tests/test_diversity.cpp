#include <cmath>
#include <functional>
#include <set>

#include "divsamp/diversity.hpp"
#include "divsamp/errors.hpp"
#include "divsamp/rng.hpp"
#include "divsamp/scfg.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace divsamp;
using testutil::schema;

namespace {

ParseTree abstract_tree(const std::string& query) {
    return abstract_entities_tree(parse_query(query, schema()));
}

std::size_t node_count(const ParseTree& t) {
    std::size_t n = 1;
    for (const ParseTree& c : t.children) n += node_count(c);
    return n;
}

// Independent fragment enumerator: for every (node, height) pair builds the
// truncated fragment with its own serializer and applies the compound rules.
struct OracleFrag {
    std::string sig;
    int height = 0;
    bool terminal = false;
};

OracleFrag oracle_fragment(const ParseTree& v, int budget) {
    OracleFrag f;
    if (v.is_leaf()) {
        f.sig = v.token->text;
        f.terminal = true;
        return f;
    }
    f.sig = std::string("( ") + node_kind_name(v.kind);
    if (budget == 0) {
        for (std::size_t i = 0; i < v.children.size(); ++i) f.sig += std::string(" ") + "▢";
        f.height = 1;
    } else {
        for (const ParseTree& c : v.children) {
            OracleFrag part = oracle_fragment(c, budget - 1);
            f.sig += " " + part.sig;
            f.height = std::max(f.height, 1 + part.height);
            f.terminal = f.terminal || part.terminal;
        }
    }
    f.sig += " )";
    return f;
}

void oracle_collect(const ParseTree& v, Counts& out) {
    if (v.is_leaf()) return;
    std::set<std::string> at_node;
    for (int h : {1, 2}) {
        OracleFrag f = oracle_fragment(v, h);
        if (f.height <= 2 && f.terminal) at_node.insert(f.sig);
    }
    for (const std::string& sig : at_node) out[sig] += 1;
    for (const ParseTree& c : v.children) oracle_collect(c, out);
}

// s-expression reader for compound signatures, used to check fragment height.
ParseTree parse_signature(const std::string& sig) {
    std::vector<std::string> toks;
    std::size_t i = 0;
    while (i < sig.size()) {
        while (i < sig.size() && sig[i] == ' ') ++i;
        std::size_t start = i;
        while (i < sig.size() && sig[i] != ' ') ++i;
        if (i > start) toks.push_back(sig.substr(start, i - start));
    }
    std::size_t pos = 0;
    std::function<ParseTree()> read = [&]() -> ParseTree {
        REQUIRE(pos < toks.size());
        if (toks[pos] == "(") {
            ++pos;      // "("
            ++pos;      // node label
            ParseTree node;
            node.kind = NodeKind::Query;  // label irrelevant for height
            while (toks[pos] != ")") node.children.push_back(read());
            ++pos;      // ")"
            return node;
        }
        return ParseTree::leaf(toks[pos++], TokenCategory::Entity);
    };
    return read();
}

}  // namespace

TEST_CASE("atoms: one per node, leaves by text, internals by kind") {
    ParseTree leaf = ParseTree::leaf("entity", TokenCategory::Entity);
    Counts single = extract_atoms(leaf);
    REQUIRE(single.size() == 1);
    CHECK(single.at("entity") == 1);

    ParseTree t = abstract_tree("( @Hotel ) filter petsAllowed:Boolean == true");
    Counts atoms = extract_atoms(t);
    std::size_t total = 0;
    for (const auto& [label, n] : atoms) total += n;
    CHECK(total == node_count(t));
    // Query over Filter over TableExpr/PredAtom: every node exactly once
    for (const char* label : {"Query", "Filter", "TableExpr", "PredAtom", "PropRef", "@Hotel",
                              "petsAllowed", "Boolean", "==", "entity"})
        CHECK(atoms.at(label) == 1);
    CHECK(atoms.size() == 10);
}

TEST_CASE("compounds: base cases") {
    CHECK(extract_compounds(ParseTree::leaf("x", TokenCategory::Entity)).empty());

    ParseTree prop = ParseTree::node(NodeKind::PropRef,
                                     {ParseTree::leaf("petsAllowed", TokenCategory::Property),
                                      ParseTree::leaf("Boolean", TokenCategory::TypeName)});
    Counts c = extract_compounds(prop);
    REQUIRE(c.size() == 1);
    CHECK(c.at("( PropRef petsAllowed Boolean )") == 1);
}

TEST_CASE("compounds of the pets-allowed tree, by hand") {
    ParseTree t = abstract_tree("( @Hotel ) filter petsAllowed:Boolean == true");
    Counts c = extract_compounds(t);
    REQUIRE(c.size() == 4);
    CHECK(c.at("( TableExpr @Hotel )") == 1);
    CHECK(c.at("( PropRef petsAllowed Boolean )") == 1);
    CHECK(c.at("( PredAtom ( PropRef ▢ ▢ ) == entity )") == 1);
    CHECK(c.at("( PredAtom ( PropRef petsAllowed Boolean ) == entity )") == 1);
}

TEST_CASE("compounds equal the brute-force enumerator on generated trees") {
    GenConfig config;
    config.max_depth = 6;
    config.max_examples = 400;
    config.seed = 17;
    std::vector<Example> pool = expand(schema(), default_grammar(schema()), config);
    std::size_t checked = 0;
    for (const Example& ex : pool) {
        ParseTree t = abstract_tree(ex.query);
        Counts oracle;
        oracle_collect(t, oracle);
        CHECK(extract_compounds(t) == oracle);
        Counts atoms = extract_atoms(t);
        std::size_t total = 0;
        for (const auto& [label, n] : atoms) total += n;
        CHECK(total == node_count(t));
        ++checked;
    }
    CHECK(checked == pool.size());
}

TEST_CASE("every compound signature deserializes to height <= 2") {
    GenConfig config;
    config.max_depth = 6;
    config.max_examples = 300;
    config.seed = 4;
    std::vector<Example> pool = expand(schema(), default_grammar(schema()), config);
    for (const Example& ex : pool) {
        for (const auto& [sig, n] : extract_compounds(abstract_tree(ex.query))) {
            CHECK(tree_height(parse_signature(sig)) <= 2);
        }
    }
}

TEST_CASE("atom and compound multisets ignore the entity token identity") {
    ParseTree a = abstract_tree("( @Hotel ) filter addressLocality:String == ''tokyo''");
    ParseTree b = abstract_tree("( @Hotel ) filter addressLocality:String == ''paris''");
    CHECK(extract_atoms(a) == extract_atoms(b));
    CHECK(extract_compounds(a) == extract_compounds(b));
}

TEST_CASE("compound weighting: clamp, unit weight, and hand-computed masses") {
    // One tree: the complete PredAtom fragment strictly contains both the
    // truncated PredAtom and the PropRef fragment with equal counts, so both
    // inner compounds clamp to the 0.01 floor; the others keep weight 1.
    std::vector<Example> sample = {testutil::ex("( @Hotel ) filter petsAllowed:Boolean == true")};
    Distribution d = weighted_compound_distribution(sample, schema());
    CHECK(d.entries.at("( TableExpr @Hotel )") == doctest::Approx(1.0));
    CHECK(d.entries.at("( PredAtom ( PropRef petsAllowed Boolean ) == entity )") ==
          doctest::Approx(1.0));
    CHECK(d.entries.at("( PredAtom ( PropRef ▢ ▢ ) == entity )") ==
          doctest::Approx(0.01));
    CHECK(d.entries.at("( PropRef petsAllowed Boolean )") == doctest::Approx(0.01));
    CHECK(d.total == doctest::Approx(2.02));
}

TEST_CASE("compound weighting on a three-example sample, by hand") {
    // e1, e2 share the pets-allowed structure; e3 is a bare table.
    // occ: G =(PredAtom(PropRef petsAllowed Boolean)==entity): 2   w = 1
    //      F1=(PredAtom(PropRef hole hole)==entity): 2             w = eps (2/2)
    //      F2=(PropRef petsAllowed Boolean): 2                     w = eps
    //      A =(TableExpr @Hotel): 3                                w = 1 - 1/3
    //      G'=(Query(TableExpr @Hotel)): 1 (e3 only, contains A)   w = 1
    std::vector<Example> sample = {
        testutil::ex("( @Hotel ) filter petsAllowed:Boolean == true"),
        testutil::ex("( @Hotel ) filter petsAllowed:Boolean == false"),
        testutil::ex("( @Hotel )"),
    };
    Distribution d = weighted_compound_distribution(sample, schema());
    CHECK(d.entries.at("( TableExpr @Hotel )") == doctest::Approx(2.0));
    CHECK(d.entries.at("( Query ( TableExpr @Hotel ) )") == doctest::Approx(1.0));
    CHECK(d.entries.at("( PredAtom ( PropRef petsAllowed Boolean ) == entity )") ==
          doctest::Approx(2.0));
    CHECK(d.entries.at("( PredAtom ( PropRef ▢ ▢ ) == entity )") ==
          doctest::Approx(0.02));
    CHECK(d.entries.at("( PropRef petsAllowed Boolean )") == doctest::Approx(0.02));
    CHECK(d.total == doctest::Approx(5.04));
}

TEST_CASE("weighted mass never exceeds the raw occurrence count") {
    GenConfig config;
    config.max_depth = 6;
    config.max_examples = 500;
    config.seed = 9;
    std::vector<Example> pool = expand(schema(), default_grammar(schema()), config);
    CompoundExtraction all;
    for (const Example& ex : pool) all.merge(extract_compounds_detailed(abstract_tree(ex.query)));
    Distribution d = weight_compounds(all.occurrences, all.contained);
    for (const auto& [sig, mass] : d.entries) {
        CHECK(mass <= static_cast<double>(all.occurrences.at(sig)) + 1e-12);
        CHECK(mass > 0.0);
    }
}

TEST_CASE("entropy reference values") {
    Distribution two_equal;
    two_equal.add("a", 2);
    two_equal.add("b", 2);
    CHECK(entropy(two_equal) == doctest::Approx(1.0));

    Distribution point;
    point.add("a", 5);
    CHECK(entropy(point) == doctest::Approx(0.0));

    Distribution skewed;
    skewed.add("a", 1);
    skewed.add("b", 1);
    skewed.add("c", 2);
    CHECK(entropy(skewed) == doctest::Approx(1.5));

    Distribution empty;
    CHECK_THROWS_AS(entropy(empty), EmptyDistributionError);
}

TEST_CASE("entropy bounds on random distributions") {
    Rng rng(123);
    for (int round = 0; round < 50; ++round) {
        Distribution d;
        std::size_t n = 1 + rng.below(20);
        for (std::size_t i = 0; i < n; ++i)
            d.add("label" + std::to_string(i), 0.05 + rng.real01() * 10.0);
        double h = entropy(d);
        CHECK(h >= -1e-12);
        CHECK(h <= std::log2(static_cast<double>(n)) + 1e-12);
        double norm_sum = 0.0;
        for (const auto& [label, p] : d.normalized()) norm_sum += p;
        CHECK(norm_sum == doctest::Approx(1.0));
    }
}

TEST_CASE("diversity report composition") {
    DiversityReport empty = diversity_report(std::span<const Example>{}, schema());
    CHECK(empty.distinct_templates == 0);
    CHECK_FALSE(empty.atom_entropy_bits.has_value());
    CHECK_FALSE(empty.compound_entropy_bits.has_value());

    std::vector<Example> one = {testutil::ex("( @Hotel ) filter petsAllowed:Boolean == true")};
    DiversityReport single = diversity_report(one, schema());
    CHECK(single.distinct_templates == 1);
    Distribution atoms = atom_distribution(one, schema());
    CHECK(*single.atom_entropy_bits == doctest::Approx(entropy(atoms)));
}

TEST_CASE("distinct template count matches a set-size oracle on a 2K sample") {
    GenConfig config;
    config.max_depth = 7;
    config.max_examples = 2000;
    config.seed = 31;
    std::vector<Example> pool = expand(schema(), default_grammar(schema()), config);
    DiversityReport report = diversity_report(pool, schema());
    std::set<std::string> oracle;
    for (const Example& ex : pool)
        oracle.insert(abstract_template(parse_query(ex.query, schema())).text);
    CHECK(report.distinct_templates == oracle.size());
}

TEST_CASE("consistency groups by entity-abstract text") {
    std::vector<Example> examples = {
        testutil::ex("( @Hotel ) filter addressLocality:String == ''tokyo''"),
        testutil::ex("( @Hotel ) filter addressLocality:String == ''paris''"),
        testutil::ex("aggregate count of ( @Hotel )"),
    };
    std::map<std::size_t, bool> correct = {{0, true}, {1, true}, {2, false}};
    ConsistencyGroups groups = consistency_groups(examples, schema(), correct);
    REQUIRE(groups.groups.size() == 2);
    CHECK(groups.fully_correct == 1);

    correct[1] = false;
    CHECK(consistency_groups(examples, schema(), correct).fully_correct == 0);
}

TEST_CASE("consistency groups: all-unique corpus has no eligible groups") {
    std::vector<Example> examples = {
        testutil::ex("( @Hotel ) filter petsAllowed:Boolean == true"),
        testutil::ex("aggregate count of ( @Hotel )"),
    };
    std::map<std::size_t, bool> correct = {{0, true}, {1, true}};
    ConsistencyGroups groups = consistency_groups(examples, schema(), correct);
    CHECK(groups.groups.size() == 2);
    CHECK(groups.fully_correct == 0);
}

TEST_CASE("consistency groups match a pairwise oracle on 40 examples") {
    GenConfig config;
    config.max_depth = 6;
    config.max_examples = 40;
    config.seed = 77;
    std::vector<Example> examples = expand(schema(), default_grammar(schema()), config);
    REQUIRE(examples.size() >= 20);
    Rng rng(5);
    std::map<std::size_t, bool> correct;
    for (std::size_t i = 0; i < examples.size(); ++i) correct[i] = rng.below(4) != 0;

    ConsistencyGroups got = consistency_groups(examples, schema(), correct);

    // O(n^2) oracle: group ids whose entity-abstract text matches pairwise.
    std::vector<std::string> keys;
    for (const Example& ex : examples)
        keys.push_back(abstract_entities(parse_query(ex.query, schema())).text);
    std::vector<bool> used(examples.size(), false);
    std::size_t oracle_groups = 0, oracle_fully_correct = 0;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        if (used[i]) continue;
        std::vector<std::size_t> group = {i};
        for (std::size_t j = i + 1; j < examples.size(); ++j)
            if (!used[j] && keys[j] == keys[i]) {
                group.push_back(j);
                used[j] = true;
            }
        ++oracle_groups;
        if (group.size() >= 2) {
            bool all = true;
            for (std::size_t id : group) all = all && correct.at(id);
            if (all) ++oracle_fully_correct;
        }
    }
    CHECK(got.groups.size() == oracle_groups);
    CHECK(got.fully_correct == oracle_fully_correct);

    std::map<std::size_t, bool> missing = correct;
    missing.erase(7);
    CHECK_THROWS_AS(consistency_groups(examples, schema(), missing), MissingFlagError);
}
