#pragma once

#include <vector>

#include "kac/vec3.hpp"

namespace kac {

/// Real solid harmonic |v|^l Y_lm(v/|v|), with Y_lm of mean square 1 on S^2.
/// m in [-l, l]; negative m are the sine partners. For l = 1 the members with
/// m = 1, -1, 0 are sqrt(3) x, sqrt(3) y, sqrt(3) z.
double solid_harmonic(int l, int m, const Vec3& v);

/// Legendre polynomial P_l(t).
double legendre(int l, double t);

struct BasisMember {
    int l = 0;
    int m = 0;
    int p = 0; // radial degree in |v|^2
};

/// Functions R_{l,p}(|v|^2) |v|^l Y_lm(v), orthonormal under the one-particle
/// marginal of sigma_N. Index 0 is the constant, 1..3 are sqrt(3) v_x, v_y, v_z,
/// 4 is C_N (|v|^2 - 1); the rest follow in order of (l + 2p, l, m).
/// Radial coefficients come from a Cholesky factorisation of the exact moment
/// matrix. For N = 2 the marginal lives on the unit sphere and only p = 0 is kept.
class SingleParticleBasis {
  public:
    explicit SingleParticleBasis(int n, int radial_deg = 4, int angular_deg = 2);

    int n() const { return n_; }
    int size() const { return static_cast<int>(members_.size()); }
    int radial_deg() const { return radial_deg_; }
    int angular_deg() const { return angular_deg_; }
    const BasisMember& member(int iota) const { return members_.at(static_cast<std::size_t>(iota)); }
    /// Position of (l, m, p) in the ordering, or -1.
    int index_of(int l, int m, int p) const;

    /// All basis values at v; `out` must hold size() doubles.
    void eval(const Vec3& v, double* out) const;
    std::vector<double> eval(const Vec3& v) const;
    double eval_one(int iota, const Vec3& v) const;

    /// R_{l,p}(s) for p = 0..radial_deg at s = |v|^2.
    void radial(int l, double s, double* out) const;

    /// Normalisation of eta_4 = C_N (|v|^2 - 1).
    double c_n() const;

  private:
    int n_;
    int radial_deg_;
    int angular_deg_;
    std::vector<BasisMember> members_;
    // coef_[l][p][q]: coefficient of s^q in R_{l,p}
    std::vector<std::vector<std::vector<double>>> coef_;
};

} // namespace kac
