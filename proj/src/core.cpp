#include "kac/core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace kac {

Diagnostics validate(const ParticleState& state, double tol)
{
    Diagnostics d;
    const int n = state.n();
    if (n < 2) {
        return d;
    }
    double e = 0.0;
    Vec3 m{};
    for (const auto& v : state.v) {
        e += norm2(v);
        m += v;
    }
    d.energy_defect = std::abs(e / n - state.energy);
    d.momentum_defect = norm(m / n - state.momentum);
    d.ok = d.energy_defect <= tol && d.momentum_defect <= tol;
    return d;
}

std::pair<Vec3, Vec3> post_collision_pair(const Vec3& vi, const Vec3& vj, const Vec3& sigma)
{
    const Vec3 rel = vi - vj;
    const double g = norm(rel);
    if (g == 0.0) {
        return {vi, vj};
    }
    const Vec3 center = 0.5 * (vi + vj);
    const Vec3 half = (0.5 * g) * sigma;
    return {center + half, center - half};
}

void apply_collision_inplace(ParticleState& state, int i, int j, const Vec3& sigma)
{
    const int n = state.n();
    if (i < 0 || j < 0 || i >= n || j >= n || i == j) {
        throw std::out_of_range("collision indices (" + std::to_string(i) + "," + std::to_string(j) +
                                ") invalid for N=" + std::to_string(n));
    }
    auto [a, b] = post_collision_pair(state.v[i], state.v[j], sigma);
    state.v[i] = a;
    state.v[j] = b;
}

ParticleState apply_collision(ParticleState state, const CollisionEvent& event)
{
    apply_collision_inplace(state, event.i, event.j, event.sigma);
    return state;
}

double pow_alpha(double magnitude, double alpha)
{
    if (alpha == 0.0) {
        return 1.0;
    }
    if (alpha == 1.0) {
        return magnitude;
    }
    if (alpha == 2.0) {
        return magnitude * magnitude;
    }
    return std::pow(magnitude, alpha);
}

double pair_rate(const ParticleState& state, int i, int j, double alpha)
{
    return pair_rate_prefactor(state.n()) * pow_alpha(norm(state.v.at(i) - state.v.at(j)), alpha);
}

ParticleState normalize_to_unit(const ParticleState& state)
{
    const double temp = state.energy - norm2(state.momentum);
    if (!(temp > 0.0)) {
        throw std::domain_error("normalize_to_unit: degenerate state, E <= |p|^2");
    }
    const double scale = 1.0 / std::sqrt(temp);
    ParticleState out;
    out.v.reserve(state.v.size());
    for (const auto& v : state.v) {
        out.v.push_back((v - state.momentum) * scale);
    }
    return out;
}

ParticleState from_unit(const ParticleState& unit, double energy, const Vec3& momentum)
{
    const double temp = energy - norm2(momentum);
    if (!(temp > 0.0)) {
        throw std::domain_error("from_unit: E must exceed |p|^2");
    }
    const double scale = std::sqrt(temp);
    ParticleState out;
    out.energy = energy;
    out.momentum = momentum;
    out.v.reserve(unit.v.size());
    for (const auto& v : unit.v) {
        out.v.push_back(v * scale + momentum);
    }
    return out;
}

double weight_w(const Vec3& v, int n)
{
    const double nn = n;
    const double w = (nn * nn - (1.0 + norm2(v)) * nn) / ((nn - 1.0) * (nn - 1.0));
    if (w >= 0.0) {
        return w;
    }
    if (w > -1e-12) {
        return 0.0;
    }
    throw std::domain_error("weight_w: |v|^2 = " + std::to_string(norm2(v)) + " exceeds N-1 = " +
                            std::to_string(n - 1));
}

double weight_w_pow(const Vec3& v, int n, double alpha)
{
    const double w = weight_w(v, n);
    if (alpha == 0.0) {
        return 1.0;
    }
    if (alpha == 2.0) {
        return w;
    }
    if (alpha == 1.0) {
        return std::sqrt(w);
    }
    return std::pow(w, 0.5 * alpha);
}

double weight_W(const ParticleState& state, double alpha)
{
    const int n = state.n();
    double s = 0.0;
    for (const auto& v : state.v) {
        s += weight_w_pow(v, n, alpha);
    }
    return s / n;
}

double weight_W_lower_bound(int n, double alpha)
{
    const double m = n - 1.0;
    const double h = 0.5 * alpha;
    return 1.0 - (1.0 - h) * n * (m * m + 1.0) / (m * m * m * m) - h / (m * m) +
           (1.0 - h) * (n + 1.0) / (m * m * m);
}

double weight_W_upper_bound(int n, double alpha)
{
    const double m = n - 1.0;
    return std::pow(1.0 - 1.0 / (m * m), 0.5 * alpha);
}

void reproject(ParticleState& state)
{
    const int n = state.n();
    Vec3 mean{};
    for (const auto& v : state.v) {
        mean += v;
    }
    mean /= n;
    double e = 0.0;
    for (auto& v : state.v) {
        v -= mean;
        e += norm2(v);
    }
    const double target = n * (state.energy - norm2(state.momentum));
    const double scale = e > 0.0 ? std::sqrt(target / e) : 1.0;
    for (auto& v : state.v) {
        v = v * scale + state.momentum;
    }
}

} // namespace kac
