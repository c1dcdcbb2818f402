#pragma once

#include <cstdint>
#include <random>

namespace byzrep {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Used to derive independent trial seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for (sweep value index, trial index) under a base seed.
/// seed = splitmix64(base ^ splitmix64(value_index ^ splitmix64(trial_index + 1)))
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t value_index,
                                    std::uint64_t trial_index) noexcept {
    return splitmix64(base ^ splitmix64(value_index ^ splitmix64(trial_index + 1)));
}

/// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline bool bernoulli(Rng& rng, double p) {
    if (p <= 0.0) return false;
    if (p >= 1.0) return true;
    return uniform01(rng) < p;
}

inline double uniform(Rng& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

}  // namespace byzrep
