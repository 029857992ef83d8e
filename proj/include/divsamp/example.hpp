#ifndef DIVSAMP_EXAMPLE_HPP
#define DIVSAMP_EXAMPLE_HPP

#include <string>

namespace divsamp {

/// One utterance-query pair; the unit of all pools and samples.
struct Example {
    std::string utterance;
    std::string query;
    std::string domain;
    bool synthetic = true;

    bool operator==(const Example&) const = default;
};

}  // namespace divsamp

#endif  // DIVSAMP_EXAMPLE_HPP
