#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "divsamp/abstraction.hpp"
#include "divsamp/corpus.hpp"
#include "divsamp/diversity.hpp"
#include "divsamp/errors.hpp"
#include "divsamp/samplers.hpp"
#include "divsamp/scfg.hpp"
#include "divsamp/splitter.hpp"
#include "json.hpp"

namespace {

using namespace divsamp;

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitSplit = 4;
constexpr int kExitSampling = 5;

SplitRatios parse_ratios(const std::string& text) {
    SplitRatios r;
    if (std::sscanf(text.c_str(), "%lf,%lf,%lf", &r.train, &r.dev, &r.test) != 3)
        throw ConfigError("ratios: expected three comma-separated numbers, got '" + text + "'");
    r.validate();
    return r;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << text;
}

void write_json(const std::string& path, const nlohmann::ordered_json& doc) {
    write_text(path, doc.dump(2) + "\n");
}

std::string csv_field(const std::string& text) {
    if (text.find_first_of(',', 0) == std::string::npos &&
        text.find_first_of('"', 0) == std::string::npos)
        return text;
    std::string quoted = "\"";
    for (char c : text) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    return quoted + "\"";
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// Validates that every query parses and every domain is declared, reporting
// the offending source line.
void validate_corpus(const CorpusFile& corpus, const Schema& schema) {
    for (std::size_t i = 0; i < corpus.examples.size(); ++i) {
        try {
            parse_query(corpus.examples[i].query, schema);
        } catch (const DataError& e) {
            throw CorpusFormatError(std::string("query does not parse: ") + e.what(),
                                    corpus.lines[i]);
        }
        if (!corpus.examples[i].domain.empty() && !schema.has_domain(corpus.examples[i].domain))
            throw CorpusFormatError("domain not declared by the schema: " +
                                        corpus.examples[i].domain,
                                    corpus.lines[i]);
    }
}

struct GenArgs {
    std::string schema, grammar, out;
    int depth = 6;
    std::size_t max = 50000;
    std::uint64_t seed = 0;
};

int cmd_gen(const GenArgs& args) {
    Schema schema = Schema::load(args.schema);
    std::vector<SyncRule> rules =
        args.grammar.empty() ? default_grammar(schema) : load_grammar(args.grammar);
    GenConfig config;
    config.max_depth = args.depth;
    config.max_examples = args.max;
    config.seed = args.seed;
    std::vector<Example> pool = expand(schema, rules, config);
    write_corpus(args.out, pool);

    nlohmann::ordered_json manifest;
    manifest["command"] = "gen";
    manifest["config"] = {{"schema", args.schema},
                          {"grammar", args.grammar.empty() ? nlohmann::ordered_json(nullptr)
                                                           : nlohmann::ordered_json(args.grammar)},
                          {"depth", args.depth},
                          {"max", args.max}};
    manifest["seed"] = args.seed;
    manifest["inputs"]["schema"] = file_digest(args.schema);
    if (!args.grammar.empty()) manifest["inputs"]["grammar"] = file_digest(args.grammar);
    manifest["outputs"][args.out] = file_digest(args.out);
    manifest["examples"] = pool.size();
    write_json(args.out + ".manifest.json", manifest);
    std::cerr << "gen: wrote " << pool.size() << " examples to " << args.out << "\n";
    return 0;
}

struct SplitArgs {
    std::string schema, annotated, pool, outdir;
    std::string ratios = "0.70,0.15,0.15";
    std::string iid_ratios = "0.81,0.09,0.10";
    std::size_t eval_cap = kDefaultEvalCap;
    std::uint64_t seed = 0;
};

int cmd_split(const SplitArgs& args) {
    SplitRatios comp_ratios = parse_ratios(args.ratios);
    SplitRatios iid_ratios = parse_ratios(args.iid_ratios);
    Schema schema = Schema::load(args.schema);
    CorpusFile annotated = read_corpus(args.annotated);
    CorpusFile pool = read_corpus(args.pool);
    validate_corpus(annotated, schema);
    validate_corpus(pool, schema);
    std::filesystem::create_directories(args.outdir);

    TemplatePartition partition =
        partition_templates(annotated.examples, schema, comp_ratios, args.seed);
    SplitManifest manifest =
        compositional_split(annotated.examples, schema, partition, iid_ratios, args.seed);
    SyntheticAssignment syn =
        assign_synthetic(pool.examples, schema, partition, args.eval_cap, args.seed);

    auto subset = [](const std::vector<Example>& all, const std::vector<std::size_t>& ids) {
        std::vector<Example> out;
        out.reserve(ids.size());
        for (std::size_t id : ids) out.push_back(all[id]);
        return out;
    };
    auto path = [&args](const char* name) {
        return (std::filesystem::path(args.outdir) / name).string();
    };

    const std::pair<const char*, const std::vector<std::size_t>*> annotated_files[] = {
        {"train.jsonl", &manifest.train},       {"iid_dev.jsonl", &manifest.iid_dev},
        {"iid_test.jsonl", &manifest.iid_test}, {"comp_dev.jsonl", &manifest.comp_dev},
        {"comp_test.jsonl", &manifest.comp_test}};
    for (const auto& [name, ids] : annotated_files)
        write_corpus(path(name), subset(annotated.examples, *ids));
    const std::pair<const char*, const std::vector<std::size_t>*> syn_files[] = {
        {"syn_train.jsonl", &syn.train},
        {"syn_comp_dev.jsonl", &syn.comp_dev},
        {"syn_comp_test.jsonl", &syn.comp_test}};
    for (const auto& [name, ids] : syn_files)
        write_corpus(path(name), subset(pool.examples, *ids));

    nlohmann::ordered_json split_doc;
    split_doc["seed"] = args.seed;
    split_doc["partition"] = {
        {"train_templates", manifest.partition.train_templates},
        {"dev_templates", manifest.partition.dev_templates},
        {"test_templates", manifest.partition.test_templates}};
    split_doc["annotated"] = {{"train", manifest.train},
                              {"iid_dev", manifest.iid_dev},
                              {"iid_test", manifest.iid_test},
                              {"comp_dev", manifest.comp_dev},
                              {"comp_test", manifest.comp_test}};
    split_doc["synthetic"] = {{"train", syn.train},
                              {"comp_dev", syn.comp_dev},
                              {"comp_test", syn.comp_test}};
    write_json(path("split_manifest.json"), split_doc);

    nlohmann::ordered_json run;
    run["command"] = "split";
    run["config"] = {{"schema", args.schema},   {"annotated", args.annotated},
                     {"pool", args.pool},       {"ratios", args.ratios},
                     {"iid_ratios", args.iid_ratios}, {"eval_cap", args.eval_cap},
                     {"outdir", args.outdir}};
    run["seed"] = args.seed;
    run["inputs"] = {{"schema", file_digest(args.schema)},
                     {"annotated", file_digest(args.annotated)},
                     {"pool", file_digest(args.pool)}};
    for (const auto& [name, ids] : annotated_files) run["outputs"][name] = file_digest(path(name));
    for (const auto& [name, ids] : syn_files) run["outputs"][name] = file_digest(path(name));
    run["outputs"]["split_manifest.json"] = file_digest(path("split_manifest.json"));
    write_json(path("run_manifest.json"), run);
    std::cerr << "split: wrote buckets to " << args.outdir << "\n";
    return 0;
}

struct SampleArgs {
    std::string schema, pool, method = "uniform", out;
    std::size_t size = 1;
    std::optional<double> alpha;
    std::optional<std::size_t> candidate_cap;
    std::uint64_t seed = 0;
};

int cmd_sample(const SampleArgs& args) {
    SamplerConfig config;
    std::optional<SampleMethod> method = parse_sample_method(args.method);
    if (!method) throw ConfigError("method: expected uniform|uat|cmaxent|hybrid");
    config.method = *method;
    config.size = args.size;
    config.alpha = args.alpha;
    config.candidate_cap = args.candidate_cap;
    config.seed = args.seed;
    config.validate();

    Schema schema = Schema::load(args.schema);
    CorpusFile pool = read_corpus(args.pool);
    validate_corpus(pool, schema);
    const bool with_candidates =
        config.method == SampleMethod::CMaxEnt || config.method == SampleMethod::Hybrid;
    SamplerPool sampler_pool = SamplerPool::build(schema, pool.examples, with_candidates);
    SampleState state = run_sampler(sampler_pool, config);

    std::vector<Example> chosen;
    chosen.reserve(state.chosen.size());
    for (std::size_t id : state.chosen) chosen.push_back(pool.examples[id]);
    write_corpus(args.out, chosen);

    nlohmann::ordered_json manifest;
    manifest["command"] = "sample";
    manifest["config"] = {{"schema", args.schema}, {"pool", args.pool}, {"method", args.method},
                          {"size", args.size}};
    if (args.alpha) manifest["config"]["alpha"] = *args.alpha;
    if (args.candidate_cap) manifest["config"]["candidate_cap"] = *args.candidate_cap;
    manifest["seed"] = args.seed;
    manifest["objective_bits"] = objective(state);
    manifest["distinct_templates"] = state.template_counts.size();
    manifest["inputs"] = {{"schema", file_digest(args.schema)},
                          {"pool", file_digest(args.pool)}};
    manifest["outputs"][args.out] = file_digest(args.out);
    write_json(args.out + ".manifest.json", manifest);
    std::cerr << "sample: wrote " << chosen.size() << " examples to " << args.out << "\n";
    return 0;
}

struct StatsArgs {
    std::string schema, pool, csv, report;
};

int cmd_stats(const StatsArgs& args) {
    Schema schema = Schema::load(args.schema);
    CorpusFile corpus = read_corpus(args.pool);
    validate_corpus(corpus, schema);
    DiversityReport report = diversity_report(corpus.examples, schema);

    if (!args.csv.empty()) {
        struct Row {
            std::string tmpl;
            double count;
        };
        std::vector<Row> rows;
        for (const auto& [tmpl, count] : report.template_distribution.entries)
            rows.push_back({tmpl, count});
        std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
            if (a.count != b.count) return a.count > b.count;
            return a.tmpl < b.tmpl;
        });
        std::string csv = "template,count,probability\n";
        for (const Row& row : rows) {
            csv += csv_field(row.tmpl) + "," + format_double(row.count) + "," +
                   format_double(row.count / report.template_distribution.total) + "\n";
        }
        write_text(args.csv, csv);
    }
    if (!args.report.empty()) {
        nlohmann::ordered_json doc;
        doc["atom_entropy_bits"] = report.atom_entropy_bits
                                       ? nlohmann::ordered_json(*report.atom_entropy_bits)
                                       : nlohmann::ordered_json(nullptr);
        doc["compound_entropy_bits"] =
            report.compound_entropy_bits ? nlohmann::ordered_json(*report.compound_entropy_bits)
                                         : nlohmann::ordered_json(nullptr);
        doc["distinct_templates"] = report.distinct_templates;
        write_json(args.report, doc);
    }
    std::cerr << "stats: " << report.distinct_templates << " distinct templates over "
              << corpus.examples.size() << " examples\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"divsamp: synthetic utterance-query pools, compositional splits, and "
                 "structurally-diverse sampling"};
    app.require_subcommand(1);

    GenArgs gen_args;
    CLI::App* gen = app.add_subcommand("gen", "generate a pool from a synchronous grammar");
    gen->add_option("--schema", gen_args.schema, "schema JSON file")->required();
    gen->add_option("--grammar", gen_args.grammar, "grammar JSON file (default: built-in)");
    gen->add_option("--depth", gen_args.depth, "maximum derivation depth");
    gen->add_option("--max", gen_args.max, "maximum number of examples");
    gen->add_option("--seed", gen_args.seed, "random seed");
    gen->add_option("--out", gen_args.out, "output pool JSONL")->required();

    SplitArgs split_args;
    CLI::App* split = app.add_subcommand("split", "build compositional and i.i.d. splits");
    split->add_option("--schema", split_args.schema, "schema JSON file")->required();
    split->add_option("--annotated", split_args.annotated, "annotated corpus JSONL")->required();
    split->add_option("--pool", split_args.pool, "synthetic pool JSONL")->required();
    split->add_option("--ratios", split_args.ratios, "template partition ratios a,b,c");
    split->add_option("--iid-ratios", split_args.iid_ratios, "i.i.d. split ratios a,b,c");
    split->add_option("--eval-cap", split_args.eval_cap, "cap on synthetic eval buckets");
    split->add_option("--seed", split_args.seed, "random seed");
    split->add_option("--outdir", split_args.outdir, "output directory")->required();

    SampleArgs sample_args;
    double alpha_value = 0.0;
    std::size_t cap_value = 0;
    CLI::App* sample = app.add_subcommand("sample", "select a subset of a synthetic pool");
    sample->add_option("--schema", sample_args.schema, "schema JSON file")->required();
    sample->add_option("--pool", sample_args.pool, "pool JSONL")->required();
    sample->add_option("--method", sample_args.method, "uniform|uat|cmaxent|hybrid")->required();
    sample->add_option("--size", sample_args.size, "number of examples to select")->required();
    CLI::Option* alpha_opt = sample->add_option("--alpha", alpha_value, "UAT skew in [0,1]");
    CLI::Option* cap_opt =
        sample->add_option("--candidate-cap", cap_value, "greedy scan budget per iteration");
    sample->add_option("--seed", sample_args.seed, "random seed");
    sample->add_option("--out", sample_args.out, "output sample JSONL")->required();

    StatsArgs stats_args;
    CLI::App* stats = app.add_subcommand("stats", "diversity diagnostics for a corpus");
    stats->add_option("--schema", stats_args.schema, "schema JSON file")->required();
    stats->add_option("--pool", stats_args.pool, "corpus JSONL")->required();
    stats->add_option("--csv", stats_args.csv, "template distribution CSV output");
    stats->add_option("--report", stats_args.report, "entropy report JSON output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (gen->parsed()) return cmd_gen(gen_args);
        if (split->parsed()) return cmd_split(split_args);
        if (sample->parsed()) {
            if (alpha_opt->count() > 0) sample_args.alpha = alpha_value;
            if (cap_opt->count() > 0) sample_args.candidate_cap = cap_value;
            return cmd_sample(sample_args);
        }
        if (stats->parsed()) return cmd_stats(stats_args);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const SplitError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSplit;
    } catch (const SamplingError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSampling;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return 0;
}
