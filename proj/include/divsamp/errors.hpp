#ifndef DIVSAMP_ERRORS_HPP
#define DIVSAMP_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace divsamp {

// Error taxonomy mirrors the CLI exit-code contract:
//   config = 2, data = 3, split = 4, sampling = 5.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SplitError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SamplingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// query-lang
struct SyntaxError : DataError {
    std::size_t position;
    SyntaxError(const std::string& msg, std::size_t pos)
        : DataError(msg + " at token " + std::to_string(pos)), position(pos) {}
};

struct UnknownSymbolError : DataError {
    std::size_t position;
    UnknownSymbolError(const std::string& symbol, std::size_t pos)
        : DataError("unknown symbol '" + symbol + "' at token " + std::to_string(pos)),
          position(pos) {}
};

struct TypeMismatchError : DataError {
    std::size_t position;
    TypeMismatchError(const std::string& msg, std::size_t pos)
        : DataError(msg + " at token " + std::to_string(pos)), position(pos) {}
};

// diversity
struct EmptyDistributionError : DataError {
    EmptyDistributionError() : DataError("distribution has zero total mass") {}
};

struct MissingFlagError : DataError {
    explicit MissingFlagError(std::size_t id)
        : DataError("no correctness flag for example " + std::to_string(id)) {}
};

// splitter
struct DegenerateCorpusError : SplitError {
    explicit DegenerateCorpusError(std::size_t templates)
        : SplitError("corpus has only " + std::to_string(templates) +
                     " distinct templates; at least 3 are required") {}
};

struct EmptyBinError : SplitError {
    explicit EmptyBinError(const std::string& bin)
        : SplitError("split bucket '" + bin + "' is empty") {}
};

// samplers
struct PoolTooSmallError : SamplingError {
    PoolTooSmallError(std::size_t requested, std::size_t available)
        : SamplingError("requested " + std::to_string(requested) + " examples from a pool of " +
                        std::to_string(available)) {}
};

struct ExhaustedTemplateError : SamplingError {
    explicit ExhaustedTemplateError(const std::string& tmpl)
        : SamplingError("template has no remaining examples: " + tmpl) {}
};

struct NoLiveCandidatesError : SamplingError {
    NoLiveCandidatesError() : SamplingError("no live candidates remain") {}
};

struct EmptyStateError : SamplingError {
    EmptyStateError() : SamplingError("sample state is empty") {}
};

// scfg-gen
struct InvalidRuleError : DataError {
    using DataError::DataError;
};

struct NonProductiveGrammarError : DataError {
    using DataError::DataError;
};

// cli-io
struct CorpusFormatError : DataError {
    std::size_t line;
    CorpusFormatError(const std::string& msg, std::size_t line_no)
        : DataError("line " + std::to_string(line_no) + ": " + msg), line(line_no) {}
};

}  // namespace divsamp

#endif  // DIVSAMP_ERRORS_HPP
