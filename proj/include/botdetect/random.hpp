#pragma once

// Seeded, platform-stable random helpers. std:: distributions are
// implementation-defined, so everything that feeds a pinned golden value
// draws from raw mt19937_64 output through these conversions instead.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace botdetect {

using Engine = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Independent engine for stream `index` under a base seed.
inline Engine stream_engine(std::uint64_t seed, std::uint64_t index) {
    return Engine(splitmix64(seed ^ splitmix64(index + 1)));
}

/// Uniform double in [0, 1) with 53 random bits.
inline double unit_double(Engine& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n). n must be positive.
inline std::size_t uniform_index(Engine& rng, std::size_t n) {
    // Lemire-style rejection keeps the draw unbiased.
    const std::uint64_t bound = n;
    const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % bound + 1) % bound;
    std::uint64_t r = rng();
    while (r > limit) r = rng();
    return static_cast<std::size_t>(r % bound);
}

template <typename T>
void shuffle(std::span<T> values, Engine& rng) {
    for (std::size_t i = values.size(); i > 1; --i) {
        std::swap(values[i - 1], values[uniform_index(rng, i)]);
    }
}

}  // namespace botdetect
