#pragma once

// Hand-rolled generators for property tests.

#include <cmath>
#include <cstdint>

#include "kac/core.hpp"
#include "kac/kernel.hpp"
#include "kac/rng.hpp"
#include "kac/sampling.hpp"

namespace gen {

inline kac::Rng rng(std::uint64_t case_index, std::uint64_t tag = 0x7e57)
{
    return kac::make_stream(0xC0FFEEULL, tag, case_index);
}

inline int particle_count(kac::Rng& r, int lo = 2, int hi = 24)
{
    return std::uniform_int_distribution<int>(lo, hi)(r);
}

/// Uniform state on S_{N,E,p} with random E and admissible p.
inline kac::ParticleState state_on_manifold(kac::Rng& r, int n)
{
    const double energy = 0.1 + 10.0 * kac::uniform01(r);
    const kac::Vec3 p = kac::sample_unit_sphere(r) * (0.95 * std::sqrt(energy) * kac::uniform01(r));
    return kac::from_unit(kac::sample_invariant_recursive(n, r), energy, p);
}

/// Arbitrary (unconstrained) velocities with occasional huge or tiny scales.
inline kac::Vec3 wild_velocity(kac::Rng& r)
{
    const double scale = std::pow(10.0, -6.0 + 12.0 * kac::uniform01(r));
    std::normal_distribution<double> g;
    return {scale * g(r), scale * g(r), scale * g(r)};
}

} // namespace gen
