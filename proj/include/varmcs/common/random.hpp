#pragma once

#include <cstdint>
#include <random>

namespace varmcs {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; derives independent sub-seeds from a master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

/// Uniform integer in [0, bound) by rejection sampling on the raw engine output.
/// Unlike std::uniform_int_distribution the sequence is the same on every standard library.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
    if (bound <= 1) return 0;
    // mt19937_64 covers the full 64-bit range; reject the low remainder band.
    const std::uint64_t threshold = (0 - bound) % bound;
    std::uint64_t draw;
    do {
        draw = rng();
    } while (draw < threshold);
    return draw % bound;
}

}  // namespace varmcs
