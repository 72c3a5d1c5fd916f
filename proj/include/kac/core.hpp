#pragma once

#include <span>
#include <utility>
#include <vector>

#include "kac/vec3.hpp"

namespace kac {

/// Default absolute tolerance on the energy/momentum constraint defects.
inline constexpr double kConstraintTol = 1e-9;

/// N velocities on the manifold of mean energy `energy` and mean momentum
/// `momentum`.
struct ParticleState {
    std::vector<Vec3> v;
    double energy = 1.0;
    Vec3 momentum{};

    int n() const { return static_cast<int>(v.size()); }
    std::span<const Vec3> view() const { return v; }
};

struct Diagnostics {
    double energy_defect = 0.0;
    double momentum_defect = 0.0;
    bool ok = false;
};

/// Constraint defects |sum|v|^2/N - E| and |sum v/N - p|.
Diagnostics validate(const ParticleState& state, double tol = kConstraintTol);

struct CollisionEvent {
    int i = 0;
    int j = 1;
    Vec3 sigma{0.0, 0.0, 1.0};
    double time = 0.0;
};

/// Energy- and momentum-conserving pair collision in the sigma
/// parameterisation. Equal velocities are returned unchanged.
std::pair<Vec3, Vec3> post_collision_pair(const Vec3& vi, const Vec3& vj, const Vec3& sigma);

void apply_collision_inplace(ParticleState& state, int i, int j, const Vec3& sigma);
ParticleState apply_collision(ParticleState state, const CollisionEvent& event);

/// Rate constant N * binom(N,2)^{-1} that multiplies |v_i - v_j|^alpha.
inline double pair_rate_prefactor(int n) { return 2.0 / (n - 1); }

/// Pair collision rate N binom(N,2)^{-1} |v_i - v_j|^alpha.
double pair_rate(const ParticleState& state, int i, int j, double alpha);

/// |x|^alpha with the convention 0^0 = 1.
double pow_alpha(double magnitude, double alpha);

/// Map S_{N,E,p} -> S_{N,1,0}: v -> (v - p)/sqrt(E - |p|^2).
ParticleState normalize_to_unit(const ParticleState& state);

/// Inverse of normalize_to_unit: S_{N,1,0} -> S_{N,E,p}.
ParticleState from_unit(const ParticleState& unit, double energy, const Vec3& momentum);

/// Rate weight w_N(v) = (N^2 - (1+|v|^2) N)/(N-1)^2, defined for |v|^2 <= N-1.
/// Rounding undershoot down to -1e-12 clamps to 0; larger violations throw
/// std::domain_error.
double weight_w(const Vec3& v, int n);

/// w_N(v)^{alpha/2} with w^0 = 1.
double weight_w_pow(const Vec3& v, int n, double alpha);

/// W^(alpha) = (1/N) sum_k w_N(v_k)^{alpha/2}.
double weight_W(const ParticleState& state, double alpha);

/// Explicit lower bound on W^(alpha) valid on all of S_N, 0 < alpha <= 2.
double weight_W_lower_bound(int n, double alpha);

/// Jensen upper bound (1 - 1/(N-1)^2)^{alpha/2}.
double weight_W_upper_bound(int n, double alpha);

/// Subtract the mean velocity and rescale so the state sits exactly on
/// S_{N,E,p} again. Used to remove rounding drift from long trajectories.
void reproject(ParticleState& state);

} // namespace kac
