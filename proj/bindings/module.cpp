#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "divsamp/abstraction.hpp"
#include "divsamp/corpus.hpp"
#include "divsamp/diversity.hpp"
#include "divsamp/errors.hpp"
#include "divsamp/samplers.hpp"
#include "divsamp/scfg.hpp"
#include "divsamp/splitter.hpp"

namespace py = pybind11;
using namespace divsamp;

namespace {

SamplerConfig make_config(const std::string& method, std::size_t size,
                          std::optional<double> alpha, std::uint64_t seed,
                          std::optional<std::size_t> candidate_cap) {
    SamplerConfig config;
    std::optional<SampleMethod> m = parse_sample_method(method);
    if (!m) throw ConfigError("method: expected uniform|uat|cmaxent|hybrid");
    config.method = *m;
    config.size = size;
    config.alpha = alpha;
    config.seed = seed;
    config.candidate_cap = candidate_cap;
    config.validate();
    return config;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "divsamp: query templates, diversity metrics, compositional splits and "
              "structurally-diverse samplers";

    py::register_exception<ConfigError>(m, "ConfigError");
    py::register_exception<DataError>(m, "DataError");
    py::register_exception<SplitError>(m, "SplitError");
    py::register_exception<SamplingError>(m, "SamplingError");

    py::class_<Schema>(m, "Schema")
        .def_static("load", &Schema::load, py::arg("path"))
        .def_static("from_json", &Schema::from_json, py::arg("text"))
        .def_property_readonly("domains", &Schema::domains);

    py::class_<Example>(m, "Example")
        .def(py::init([](std::string utterance, std::string query, std::string domain,
                         bool synthetic) {
                 return Example{std::move(utterance), std::move(query), std::move(domain),
                                synthetic};
             }),
             py::arg("utterance"), py::arg("query"), py::arg("domain") = "",
             py::arg("synthetic") = true)
        .def_readwrite("utterance", &Example::utterance)
        .def_readwrite("query", &Example::query)
        .def_readwrite("domain", &Example::domain)
        .def_readwrite("synthetic", &Example::synthetic)
        .def("__repr__", [](const Example& e) {
            return "Example(utterance=" + e.utterance + ", query=" + e.query + ")";
        });

    py::class_<ParseTree>(m, "ParseTree")
        .def_property_readonly("kind", [](const ParseTree& t) {
            return std::string(node_kind_name(t.kind));
        })
        .def_property_readonly("is_leaf", &ParseTree::is_leaf)
        .def_property_readonly("children",
                               [](const ParseTree& t) { return t.children; })
        .def_property_readonly("token", [](const ParseTree& t) {
            return t.token ? std::optional<std::string>(t.token->text) : std::nullopt;
        })
        .def("__eq__", [](const ParseTree& a, const ParseTree& b) { return a == b; })
        .def("__repr__", [](const ParseTree& t) { return "<ParseTree " + render_query(t) + ">"; });

    m.def("parse_query", &parse_query, py::arg("text"), py::arg("schema"));
    m.def("render_query", &render_query, py::arg("tree"));
    m.def("tree_height", &tree_height, py::arg("tree"));

    m.def(
        "abstract_template",
        [](const ParseTree& t) { return abstract_template(t).text; },
        py::arg("tree"));
    m.def(
        "abstract_entities",
        [](const ParseTree& t) { return abstract_entities(t).text; },
        py::arg("tree"));
    m.def(
        "template_of",
        [](const std::string& query, const Schema& schema) {
            return template_of(query, schema).text;
        },
        py::arg("query"), py::arg("schema"));

    m.def("extract_atoms", &extract_atoms, py::arg("tree"));
    m.def("extract_compounds", &extract_compounds, py::arg("tree"));

    py::class_<Distribution>(m, "Distribution")
        .def_readonly("entries", &Distribution::entries)
        .def_readonly("total", &Distribution::total)
        .def("normalized", &Distribution::normalized);

    m.def("entropy", &entropy, py::arg("dist"));
    m.def(
        "entropy_of_counts",
        [](const std::map<std::string, double>& counts) {
            Distribution d;
            for (const auto& [label, w] : counts) d.add(label, w);
            return entropy(d);
        },
        py::arg("counts"));

    m.def(
        "atom_distribution",
        [](const std::vector<Example>& sample, const Schema& schema) {
            return atom_distribution(sample, schema);
        },
        py::arg("sample"), py::arg("schema"));
    m.def(
        "weighted_compound_distribution",
        [](const std::vector<Example>& sample, const Schema& schema) {
            return weighted_compound_distribution(sample, schema);
        },
        py::arg("sample"), py::arg("schema"));

    py::class_<DiversityReport>(m, "DiversityReport")
        .def_readonly("atom_entropy_bits", &DiversityReport::atom_entropy_bits)
        .def_readonly("compound_entropy_bits", &DiversityReport::compound_entropy_bits)
        .def_readonly("distinct_templates", &DiversityReport::distinct_templates)
        .def_readonly("template_distribution", &DiversityReport::template_distribution);

    m.def(
        "diversity_report",
        [](const std::vector<Example>& sample, const Schema& schema) {
            return diversity_report(sample, schema);
        },
        py::arg("sample"), py::arg("schema"));

    m.def(
        "consistency_groups",
        [](const std::vector<Example>& examples, const Schema& schema,
           const std::map<std::size_t, bool>& correct) {
            ConsistencyGroups g = consistency_groups(examples, schema, correct);
            return py::make_tuple(g.groups, g.fully_correct);
        },
        py::arg("examples"), py::arg("schema"), py::arg("correct"));

    py::class_<TemplatePartition>(m, "TemplatePartition")
        .def_readonly("train_templates", &TemplatePartition::train_templates)
        .def_readonly("dev_templates", &TemplatePartition::dev_templates)
        .def_readonly("test_templates", &TemplatePartition::test_templates);

    py::class_<SplitManifest>(m, "SplitManifest")
        .def_readonly("train", &SplitManifest::train)
        .def_readonly("iid_dev", &SplitManifest::iid_dev)
        .def_readonly("iid_test", &SplitManifest::iid_test)
        .def_readonly("comp_dev", &SplitManifest::comp_dev)
        .def_readonly("comp_test", &SplitManifest::comp_test)
        .def_readonly("partition", &SplitManifest::partition)
        .def_readonly("seed", &SplitManifest::seed);

    py::class_<SyntheticAssignment>(m, "SyntheticAssignment")
        .def_readonly("train", &SyntheticAssignment::train)
        .def_readonly("comp_dev", &SyntheticAssignment::comp_dev)
        .def_readonly("comp_test", &SyntheticAssignment::comp_test);

    m.def(
        "partition_templates",
        [](const std::vector<Example>& annotated, const Schema& schema, double train, double dev,
           double test, std::uint64_t seed) {
            return partition_templates(annotated, schema, SplitRatios{train, dev, test}, seed);
        },
        py::arg("annotated"), py::arg("schema"), py::arg("train") = 0.70, py::arg("dev") = 0.15,
        py::arg("test") = 0.15, py::arg("seed") = 0);
    m.def(
        "compositional_split",
        [](const std::vector<Example>& annotated, const Schema& schema,
           const TemplatePartition& partition, double train, double dev, double test,
           std::uint64_t seed) {
            return compositional_split(annotated, schema, partition,
                                       SplitRatios{train, dev, test}, seed);
        },
        py::arg("annotated"), py::arg("schema"), py::arg("partition"), py::arg("train") = 0.81,
        py::arg("dev") = 0.09, py::arg("test") = 0.10, py::arg("seed") = 0);
    m.def(
        "assign_synthetic",
        [](const std::vector<Example>& pool, const Schema& schema,
           const TemplatePartition& partition, std::size_t eval_cap, std::uint64_t seed) {
            return assign_synthetic(pool, schema, partition, eval_cap, seed);
        },
        py::arg("pool"), py::arg("schema"), py::arg("partition"),
        py::arg("eval_cap") = kDefaultEvalCap, py::arg("seed") = 0);

    py::class_<SamplerPool>(m, "SamplerPool")
        .def_static(
            "build",
            [](const Schema& schema, const std::vector<Example>& examples, bool with_candidates) {
                return SamplerPool::build(schema, examples, with_candidates);
            },
            py::arg("schema"), py::arg("examples"), py::arg("with_candidates") = true,
            py::keep_alive<0, 1>())
        .def_property_readonly("size", &SamplerPool::size)
        .def_property_readonly("template_count", &SamplerPool::template_count)
        .def_property_readonly("candidate_count", &SamplerPool::candidate_count)
        .def("abstract_query", &SamplerPool::abstract_query, py::arg("example_id"));

    py::class_<SampleState>(m, "SampleState")
        .def_readonly("chosen", &SampleState::chosen)
        .def_readonly("atom_dist", &SampleState::atom_dist)
        .def_readonly("compound_dist", &SampleState::compound_dist)
        .def_readonly("template_counts", &SampleState::template_counts);

    m.def("objective", &objective, py::arg("state"));
    m.def(
        "sample",
        [](const SamplerPool& pool, const std::string& method, std::size_t size,
           std::optional<double> alpha, std::uint64_t seed,
           std::optional<std::size_t> candidate_cap) {
            return run_sampler(pool, make_config(method, size, alpha, seed, candidate_cap));
        },
        py::arg("pool"), py::arg("method"), py::arg("size"), py::arg("alpha") = std::nullopt,
        py::arg("seed") = 0, py::arg("candidate_cap") = std::nullopt);

    m.def(
        "generate",
        [](const Schema& schema, int depth, std::size_t max_examples, std::uint64_t seed,
           const std::string& grammar_path) {
            std::vector<SyncRule> rules =
                grammar_path.empty() ? default_grammar(schema) : load_grammar(grammar_path);
            GenConfig config;
            config.max_depth = depth;
            config.max_examples = max_examples;
            config.seed = seed;
            return expand(schema, rules, config);
        },
        py::arg("schema"), py::arg("depth") = 6, py::arg("max_examples") = 50000,
        py::arg("seed") = 0, py::arg("grammar_path") = "");

    m.def("read_corpus", [](const std::string& path) { return read_corpus(path).examples; },
          py::arg("path"));
    m.def(
        "write_corpus",
        [](const std::string& path, const std::vector<Example>& examples) {
            write_corpus(path, examples);
        },
        py::arg("path"), py::arg("examples"));
    m.def("file_digest", &file_digest, py::arg("path"));

    m.attr("__version__") = "0.1.0";
}
