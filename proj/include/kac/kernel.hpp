#pragma once

#include <optional>
#include <vector>

#include "kac/rng.hpp"
#include "kac/vec3.hpp"

namespace kac {

/// Even scattering density b on [-1,1], piecewise linear on a uniform grid.
/// Renormalised on construction so that (1/2) int b = 1; sampled by inverse CDF.
class TabulatedDensity {
  public:
    /// `values` are b at the grid points -1, -1 + h, ..., 1 (at least two).
    /// Throws std::invalid_argument for negative, non-even or all-zero input.
    explicit TabulatedDensity(std::vector<double> values);

    double operator()(double t) const;
    double sample_cosine(Rng& rng) const;
    const std::vector<double>& values() const { return values_; }

  private:
    std::vector<double> values_;
    std::vector<double> cdf_; // cumulative probability at grid points
    double h_ = 0.0;
};

struct KernelSpec {
    double alpha = 1.0;
    std::optional<TabulatedDensity> table; // empty: b = 1

    bool uniform() const { return !table.has_value(); }
    double b(double t) const { return table ? (*table)(t) : 1.0; }
};

/// Unit vector uniform on S^2.
Vec3 sample_unit_sphere(Rng& rng);

/// Scattering direction sigma with cos(sigma, reference) drawn from b(t)/2
/// and uniform azimuth. For the uniform kernel sigma is uniform on S^2.
Vec3 sample_scatter_direction(const Vec3& reference, const KernelSpec& kernel, Rng& rng);

/// Any unit vector orthogonal to `n` (|n| = 1), plus a second completing the frame.
void orthonormal_frame(const Vec3& n, Vec3& e1, Vec3& e2);

} // namespace kac
