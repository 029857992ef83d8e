#ifndef DIVSAMP_CORPUS_HPP
#define DIVSAMP_CORPUS_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "divsamp/example.hpp"

namespace divsamp {

/// JSONL corpus: one example per line with fields
/// utterance (string), query (string), domain (string), synthetic (bool).
struct CorpusFile {
    std::vector<Example> examples;
    std::vector<std::size_t> lines;  // 1-based source line per example
};

CorpusFile read_corpus(const std::string& path);
void write_corpus(const std::string& path, std::span<const Example> examples);

/// FNV-1a 64 digest of a file's bytes as 16 hex characters.
std::string file_digest(const std::string& path);

}  // namespace divsamp

#endif  // DIVSAMP_CORPUS_HPP
