#pragma once

#include <cstdint>
#include <random>

namespace boga {

// Hierarchical RNG stream derivation. Every consumer of randomness gets its
// own stream keyed by (master seed, generation, purpose), so e.g. enlarging
// the proposal pool never perturbs elite-selection draws of the same run.

enum class StreamPurpose : std::uint64_t {
    init_topup = 1,
    elites = 2,
    pool = 3,
    surrogate = 4,
    acquisition = 5,
    fuzz = 6,
};

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derive a child seed from a master seed and up to two context words.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
    return splitmix64(splitmix64(splitmix64(master) ^ a) ^ b);
}

/// Stream for one (generation, purpose) pair of a campaign.
inline std::mt19937_64 make_stream(std::uint64_t master_seed, std::uint64_t generation,
                                   StreamPurpose purpose) {
    return std::mt19937_64(
        derive_seed(master_seed, generation, static_cast<std::uint64_t>(purpose)));
}

} // namespace boga
