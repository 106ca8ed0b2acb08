#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace kdcvg {

/// Seeded generator with portable uniform/normal draws.
///
/// std::mt19937_64 is bit-specified by the standard; the distribution
/// adaptors in <random> are not, so the conversions live here to keep
/// every seeded run identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 bits of resolution.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (no cached second value).
    double normal();

    /// Uniform integer in [0, n). Requires n > 0.
    std::size_t below(std::size_t n);

private:
    std::mt19937_64 engine_;
};

/// SplitMix64 finalizer; used to derive independent stream seeds.
std::uint64_t mix64(std::uint64_t x);

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix64(seed ^ mix64(stream + 0x9E3779B97F4A7C15ULL));
}

}  // namespace kdcvg
