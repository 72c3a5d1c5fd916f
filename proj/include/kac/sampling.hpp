#pragma once

#include <span>

#include "kac/core.hpp"
#include "kac/rng.hpp"

namespace kac {

/// Point of the closed unit ball.
struct BallPoint {
    Vec3 v{};
};

/// Law nu_N on the unit ball with density proportional to (1-|v|^2)^{(3N-8)/2}.
struct RadialLawNu {
    int n = 3;

    double beta_a() const { return 1.5; }
    double beta_b() const { return 1.5 * (n - 2); }
    /// Normalised density of r = |v| on [0,1].
    double radial_density(double r) const;
};

BallPoint sample_nu(int n, Rng& rng);

/// Embeds an (N-1)-particle state on S_{N-1,1,0} and a ball point into S_{N,1,0}.
/// Slot k (0-based) receives sqrt(N-1) v, the inner particles fill the other
/// slots in order.
ParticleState lift_Tk(const ParticleState& inner, const BallPoint& v, int k);

/// Exact sample of sigma_N built by iterating the lift from the N=2 base case.
/// The lifts are composed as affine maps so the cost is O(N).
ParticleState sample_invariant_recursive(int n, Rng& rng);

/// Exact sample of sigma_N by projecting a 3N Gaussian onto the constraints.
ParticleState sample_invariant_gauss(int n, Rng& rng);

/// Uniform sample of the slice {v_k = v_fixed} of S_{N,1,0}.
ParticleState sample_conditional_slice(const Vec3& v_fixed, int k, int n, Rng& rng);

/// Uniform sample of S_{N,1,0} with the listed coordinates pinned.
ParticleState sample_conditional_fixed(std::span<const int> indices, std::span<const Vec3> values, int n,
                                       Rng& rng);

/// Uniformly random relabelling of the particles.
void shuffle_particles(ParticleState& state, Rng& rng);

/// E|v_1|^{2k} under sigma_N, exact.
double exact_marginal_moment(int n, int k);

/// E|v|^{2k} for the isotropic Gaussian with E|v|^2 = 1.
double gaussian_moment(int k);

} // namespace kac
