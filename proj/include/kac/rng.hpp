#pragma once

#include <cstdint>
#include <random>

namespace kac {

using Rng = std::mt19937_64;

/// Master seed for a parallel Monte Carlo run. Every batch derives its own
/// stream from (seed, stream tag, batch index), so results do not depend on
/// the number of worker threads.
struct Seed {
    std::uint64_t value = 0x5eed;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Counter-based stream derivation: seed -> tag -> index, each step a
/// SplitMix64 finalisation of the running key.
std::uint64_t derive_key(std::uint64_t seed, std::uint64_t tag, std::uint64_t index = 0);

Rng make_stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index = 0);
inline Rng make_stream(Seed seed, std::uint64_t tag, std::uint64_t index = 0)
{
    return make_stream(seed.value, tag, index);
}

/// Child seed for a sub-computation, so that nested estimators stay independent.
inline Seed child_seed(Seed seed, std::uint64_t tag) { return Seed{derive_key(seed.value, tag, 0x9e37)}; }

inline double uniform01(Rng& rng) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng); }

} // namespace kac
