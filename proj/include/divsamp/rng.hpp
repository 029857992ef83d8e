#ifndef DIVSAMP_RNG_HPP
#define DIVSAMP_RNG_HPP

#include <cstdint>
#include <numeric>
#include <random>
#include <string_view>
#include <vector>

namespace divsamp {

/// Deterministic RNG. Bounded draws are hand-rolled (rejection sampling) so
/// results do not depend on the standard library's distribution internals.
/// `stream` derives an independent sub-stream from a base seed and a label,
/// letting one command seed feed several phases without collisions.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    static Rng stream(std::uint64_t seed, std::string_view label) {
        std::uint64_t h = 1469598103934665603ull;  // FNV-1a 64
        for (char c : label) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        return Rng(seed ^ (h * 0x9e3779b97f4a7c15ull));
    }

    std::uint64_t next_u64() { return engine_(); }

    /// Unbiased integer in [0, bound), bound > 0.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t threshold = (0 - bound) % bound;  // 2^64 mod bound
        for (;;) {
            std::uint64_t r = engine_();
            if (r >= threshold) return r % bound;
        }
    }

    /// Uniform double in [0, 1).
    double real01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    /// k distinct indices from [0, population), in selection order.
    std::vector<std::size_t> sample_indices(std::size_t population, std::size_t k) {
        std::vector<std::size_t> idx(population);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        if (k >= population) return idx;
        for (std::size_t i = 0; i < k; ++i) {
            std::size_t j = i + static_cast<std::size_t>(below(population - i));
            std::swap(idx[i], idx[j]);
        }
        idx.resize(k);
        return idx;
    }

  private:
    std::mt19937_64 engine_;
};

}  // namespace divsamp

#endif  // DIVSAMP_RNG_HPP
