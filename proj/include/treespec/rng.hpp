#ifndef TREESPEC_RNG_HPP
#define TREESPEC_RNG_HPP

#include <cmath>
#include <cstdint>

namespace treespec {

// Counter-based random generation: every variate is a pure function of
// (seed, unit, stream), so fields can be generated in any order, in
// parallel, or lazily, with identical results. `unit` is typically a vertex
// index; `stream` separates multiple draws at the same unit.

namespace rng {

/// SplitMix64 finalizer; full-avalanche 64-bit mixer.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline std::uint64_t hash(std::uint64_t seed, std::uint64_t unit, std::uint64_t stream) {
    return mix64(mix64(mix64(seed) ^ unit) ^ stream);
}

/// Derives an independent seed, e.g. one per Monte Carlo sample.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return mix64(mix64(seed ^ 0xA5A5A5A5A5A5A5A5ULL) ^ index);
}

/// Uniform on (0, 1]: 53 random bits, shifted away from 0 so log() is safe.
inline double uniform01(std::uint64_t seed, std::uint64_t unit, std::uint64_t stream) {
    const std::uint64_t bits = hash(seed, unit, stream) >> 11;
    return (double(bits) + 1.0) * 0x1.0p-53;
}

/// Standard normal via Box-Muller (cosine branch), keyed on (seed, unit).
/// Streams s and s+1 of the underlying hash are consumed per draw, so pass
/// distinct `stream` values for independent normals at the same unit.
inline double standard_normal(std::uint64_t seed, std::uint64_t unit, std::uint64_t stream = 0) {
    const double u1 = uniform01(seed, unit, 2 * stream);
    const double u2 = uniform01(seed, unit, 2 * stream + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

/// Uniform integer in [0, bound) via the fixed-point multiply reduction.
inline std::uint32_t uniform_index(std::uint64_t seed, std::uint64_t unit, std::uint64_t stream,
                                   std::uint32_t bound) {
    const std::uint64_t h = hash(seed, unit, stream);
    return std::uint32_t((static_cast<unsigned __int128>(h) * bound) >> 64);
}

} // namespace rng

} // namespace treespec

#endif
