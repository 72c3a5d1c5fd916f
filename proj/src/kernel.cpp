#include "kac/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kac {

TabulatedDensity::TabulatedDensity(std::vector<double> values) : values_(std::move(values))
{
    const std::size_t m = values_.size();
    if (m < 2) {
        throw std::invalid_argument("tabulated density needs at least two grid values");
    }
    for (std::size_t i = 0; i < m; ++i) {
        if (!(values_[i] >= 0.0) || !std::isfinite(values_[i])) {
            throw std::invalid_argument("tabulated density must be finite and non-negative");
        }
        const double mirror = values_[m - 1 - i];
        if (std::abs(values_[i] - mirror) > 1e-9 * std::max(1.0, std::abs(mirror))) {
            throw std::invalid_argument("tabulated density must be even on [-1,1]");
        }
    }
    h_ = 2.0 / static_cast<double>(m - 1);
    double area = 0.0;
    for (std::size_t i = 0; i + 1 < m; ++i) {
        area += 0.5 * h_ * (values_[i] + values_[i + 1]);
    }
    if (!(area > 0.0)) {
        throw std::invalid_argument("tabulated density integrates to zero");
    }
    // (1/2) int b = 1  <=>  int b = 2
    const double scale = 2.0 / area;
    for (auto& v : values_) {
        v *= scale;
    }
    cdf_.assign(m, 0.0);
    for (std::size_t i = 0; i + 1 < m; ++i) {
        cdf_[i + 1] = cdf_[i] + 0.25 * h_ * (values_[i] + values_[i + 1]);
    }
    cdf_.back() = 1.0;
}

double TabulatedDensity::operator()(double t) const
{
    if (t <= -1.0) {
        return values_.front();
    }
    if (t >= 1.0) {
        return values_.back();
    }
    const double x = (t + 1.0) / h_;
    const auto i = std::min(static_cast<std::size_t>(x), values_.size() - 2);
    const double f = x - static_cast<double>(i);
    return (1.0 - f) * values_[i] + f * values_[i + 1];
}

double TabulatedDensity::sample_cosine(Rng& rng) const
{
    const double u = uniform01(rng);
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    std::size_t i = it == cdf_.begin() ? 0 : static_cast<std::size_t>(it - cdf_.begin()) - 1;
    i = std::min(i, values_.size() - 2);
    // probability density is b/2; inside the cell it is linear from f0 to f1
    const double target = u - cdf_[i];
    const double f0 = 0.5 * values_[i];
    const double f1 = 0.5 * values_[i + 1];
    const double slope = (f1 - f0) / h_;
    double x;
    if (std::abs(slope) * h_ < 1e-12 * std::max(f0, 1e-300)) {
        x = f0 > 0.0 ? target / f0 : 0.5 * h_;
    } else {
        const double disc = std::max(0.0, f0 * f0 + 2.0 * slope * target);
        x = (std::sqrt(disc) - f0) / slope;
    }
    x = std::clamp(x, 0.0, h_);
    return std::clamp(-1.0 + static_cast<double>(i) * h_ + x, -1.0, 1.0);
}

Vec3 sample_unit_sphere(Rng& rng)
{
    const double z = 2.0 * uniform01(rng) - 1.0;
    const double phi = 2.0 * std::numbers::pi * uniform01(rng);
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {s * std::cos(phi), s * std::sin(phi), z};
}

void orthonormal_frame(const Vec3& n, Vec3& e1, Vec3& e2)
{
    const Vec3 helper = std::abs(n.x) < 0.9 ? Vec3{1.0, 0.0, 0.0} : Vec3{0.0, 1.0, 0.0};
    e1 = cross(n, helper);
    e1 /= norm(e1);
    e2 = cross(n, e1);
}

Vec3 sample_scatter_direction(const Vec3& reference, const KernelSpec& kernel, Rng& rng)
{
    if (kernel.uniform()) {
        return sample_unit_sphere(rng);
    }
    const double t = kernel.table->sample_cosine(rng);
    const double phi = 2.0 * std::numbers::pi * uniform01(rng);
    const double s = std::sqrt(std::max(0.0, 1.0 - t * t));
    Vec3 e1, e2;
    orthonormal_frame(reference, e1, e2);
    return t * reference + (s * std::cos(phi)) * e1 + (s * std::sin(phi)) * e2;
}

} // namespace kac
