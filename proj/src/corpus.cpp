#include "divsamp/corpus.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>

#include "divsamp/errors.hpp"
#include "json.hpp"

namespace divsamp {

CorpusFile read_corpus(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("corpus: cannot open " + path);
    CorpusFile corpus;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw CorpusFormatError(std::string("invalid JSON: ") + e.what(), line_no);
        }
        if (!rec.is_object() || !rec.contains("utterance") || !rec.contains("query") ||
            !rec.contains("domain") || !rec.contains("synthetic"))
            throw CorpusFormatError("record needs fields utterance, query, domain, synthetic",
                                    line_no);
        try {
            corpus.examples.push_back(Example{rec.at("utterance").get<std::string>(),
                                              rec.at("query").get<std::string>(),
                                              rec.at("domain").get<std::string>(),
                                              rec.at("synthetic").get<bool>()});
        } catch (const nlohmann::json::exception& e) {
            throw CorpusFormatError(std::string("bad field type: ") + e.what(), line_no);
        }
        corpus.lines.push_back(line_no);
    }
    return corpus;
}

void write_corpus(const std::string& path, std::span<const Example> examples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("corpus: cannot write " + path);
    for (const Example& ex : examples) {
        nlohmann::ordered_json rec;
        rec["utterance"] = ex.utterance;
        rec["query"] = ex.query;
        rec["domain"] = ex.domain;
        rec["synthetic"] = ex.synthetic;
        out << rec.dump() << '\n';
    }
    if (!out) throw ConfigError("corpus: write failed for " + path);
}

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("digest: cannot open " + path);
    std::uint64_t h = 1469598103934665603ull;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 1099511628211ull;
        }
        if (!in) break;
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return std::string(hex);
}

}  // namespace divsamp
