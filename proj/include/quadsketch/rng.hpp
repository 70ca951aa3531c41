#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

// Deterministic sampling helpers. The std::*_distribution adaptors are
// implementation-defined, so everything that must reproduce bit-identical
// output across runs draws raw words from std::mt19937_64 and maps them here.

namespace quadsketch {

using Rng = std::mt19937_64;

// Uniform double in [0, 1) with 53 random bits.
inline double rng_canonical(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1p-53;
}

// Unbiased integer in [0, n).
inline std::uint64_t rng_index(Rng& rng, std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("rng_index: n must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % n;
}

// Standard normal via Box-Muller. Always consumes two words.
inline double rng_normal(Rng& rng) {
    const double u1 = static_cast<double>((rng() >> 11) + 1) * 0x1p-53; // (0, 1]
    const double u2 = rng_canonical(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// Inverse-CDF draw from non-negative weights. Zero total weight falls back
// to a uniform index.
inline std::size_t rng_categorical(Rng& rng, std::span<const double> weights) {
    if (weights.empty()) throw std::invalid_argument("rng_categorical: empty weights");
    double total = 0.0;
    for (double w : weights) total += w;
    if (!(total > 0.0)) return static_cast<std::size_t>(rng_index(rng, weights.size()));
    const double u = rng_canonical(rng) * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (u < acc) return i;
    }
    return weights.size() - 1;
}

// splitmix64; used to derive independent substream seeds.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace quadsketch
