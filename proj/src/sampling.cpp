#include "kac/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "kac/kernel.hpp"

namespace kac {

namespace {

double sample_beta(double a, double b, Rng& rng)
{
    std::gamma_distribution<double> ga(a, 1.0);
    std::gamma_distribution<double> gb(b, 1.0);
    for (;;) {
        const double x = ga(rng);
        const double y = gb(rng);
        if (x + y > 0.0) {
            return x / (x + y);
        }
    }
}

} // namespace

double RadialLawNu::radial_density(double r) const
{
    if (r < 0.0 || r > 1.0) {
        return 0.0;
    }
    // r^2 ~ Beta(a, b)  =>  density of r is 2 r Beta_pdf(r^2)
    const double a = beta_a();
    const double b = beta_b();
    const double lognorm = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
    const double s = r * r;
    if (s >= 1.0) {
        return 0.0; // b >= 3/2 for N >= 3
    }
    return 2.0 * r * std::exp(lognorm + (a - 1.0) * std::log(s) + (b - 1.0) * std::log1p(-s));
}

BallPoint sample_nu(int n, Rng& rng)
{
    if (n < 3) {
        throw std::invalid_argument("sample_nu: N must be at least 3, got " + std::to_string(n));
    }
    const RadialLawNu law{n};
    const double s = sample_beta(law.beta_a(), law.beta_b(), rng);
    return {std::sqrt(s) * sample_unit_sphere(rng)};
}

ParticleState lift_Tk(const ParticleState& inner, const BallPoint& v, int k)
{
    const int n = inner.n() + 1;
    if (k < 0 || k >= n) {
        throw std::out_of_range("lift_Tk: slot index out of range");
    }
    const double r2 = norm2(v.v);
    if (r2 > 1.0 + 1e-12) {
        throw std::domain_error("lift_Tk: ball point outside the unit ball");
    }
    const double m = n - 1.0;
    const double beta = std::sqrt(std::max(0.0, (n / m) * (1.0 - r2)));
    const double root = std::sqrt(m);
    const Vec3 shift = v.v / root;
    ParticleState out;
    out.v.resize(static_cast<std::size_t>(n));
    int src = 0;
    for (int j = 0; j < n; ++j) {
        if (j == k) {
            out.v[j] = root * v.v;
        } else {
            out.v[j] = beta * inner.v[src++] - shift;
        }
    }
    return out;
}

ParticleState sample_invariant_recursive(int n, Rng& rng)
{
    if (n < 2) {
        throw std::invalid_argument("sample_invariant_recursive: N must be at least 2");
    }
    const Vec3 u = sample_unit_sphere(rng);
    ParticleState out;
    out.v.resize(static_cast<std::size_t>(n));
    if (n == 2) {
        out.v = {u, -u};
        return out;
    }
    std::vector<Vec3> ball(static_cast<std::size_t>(n + 1));
    for (int m = 3; m <= n; ++m) {
        ball[m] = sample_nu(m, rng).v;
    }
    // Level m maps x -> beta_m x - v_m/sqrt(m-1) on the first m-1 slots and
    // writes slot m. Compose from the top: S(x) = a x + c.
    double a = 1.0;
    Vec3 c{};
    for (int m = n; m >= 3; --m) {
        const double mm = m - 1.0;
        const double root = std::sqrt(mm);
        out.v[m - 1] = a * (root * ball[m]) + c;
        const double beta = std::sqrt(std::max(0.0, (m / mm) * (1.0 - norm2(ball[m]))));
        c = a * (-1.0 / root) * ball[m] + c;
        a *= beta;
    }
    out.v[0] = a * u + c;
    out.v[1] = -a * u + c;
    return out;
}

ParticleState sample_invariant_gauss(int n, Rng& rng)
{
    if (n < 2) {
        throw std::invalid_argument("sample_invariant_gauss: N must be at least 2");
    }
    std::normal_distribution<double> g(0.0, 1.0);
    ParticleState out;
    out.v.resize(static_cast<std::size_t>(n));
    for (;;) {
        Vec3 mean{};
        for (auto& v : out.v) {
            v = {g(rng), g(rng), g(rng)};
            mean += v;
        }
        mean /= n;
        double e = 0.0;
        for (auto& v : out.v) {
            v -= mean;
            e += norm2(v);
        }
        if (e > 1e-300) {
            const double scale = std::sqrt(n / e);
            for (auto& v : out.v) {
                v *= scale;
            }
            return out;
        }
    }
}

ParticleState sample_conditional_fixed(std::span<const int> indices, std::span<const Vec3> values, int n,
                                       Rng& rng)
{
    const int m = static_cast<int>(indices.size());
    if (m != static_cast<int>(values.size())) {
        throw std::invalid_argument("sample_conditional_fixed: index/value count mismatch");
    }
    if (m >= n) {
        throw std::invalid_argument("sample_conditional_fixed: nothing left to sample");
    }
    std::vector<char> pinned(static_cast<std::size_t>(n), 0);
    Vec3 p{};
    double e = 0.0;
    for (int i = 0; i < m; ++i) {
        const int k = indices[i];
        if (k < 0 || k >= n || pinned[k]) {
            throw std::out_of_range("sample_conditional_fixed: bad or repeated index");
        }
        pinned[k] = 1;
        p += values[i];
        e += norm2(values[i]);
    }
    const int free = n - m;
    const double c2 = (n - e - norm2(p) / free) / free;
    if (c2 < -1e-10) {
        throw std::domain_error("sample_conditional_fixed: pinned velocities exceed the energy budget");
    }
    const double c = std::sqrt(std::max(0.0, c2));
    const Vec3 shift = p / free;

    ParticleState out;
    out.v.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < m; ++i) {
        out.v[indices[i]] = values[i];
    }
    if (free == 1) {
        for (int j = 0; j < n; ++j) {
            if (!pinned[j]) {
                out.v[j] = -p;
            }
        }
        return out;
    }
    const ParticleState y = sample_invariant_gauss(free, rng);
    int src = 0;
    for (int j = 0; j < n; ++j) {
        if (!pinned[j]) {
            out.v[j] = c * y.v[src++] - shift;
        }
    }
    return out;
}

ParticleState sample_conditional_slice(const Vec3& v_fixed, int k, int n, Rng& rng)
{
    if (n < 3) {
        throw std::invalid_argument("sample_conditional_slice: N must be at least 3");
    }
    if (norm2(v_fixed) > (n - 1) * (1.0 + 1e-12)) {
        throw std::domain_error("sample_conditional_slice: |v|^2 exceeds N-1");
    }
    const int idx[1] = {k};
    const Vec3 val[1] = {v_fixed};
    return sample_conditional_fixed(idx, val, n, rng);
}

void shuffle_particles(ParticleState& state, Rng& rng)
{
    std::shuffle(state.v.begin(), state.v.end(), rng);
}

double exact_marginal_moment(int n, int k)
{
    if (n < 2 || k < 0) {
        throw std::invalid_argument("exact_marginal_moment: need N >= 2 and k >= 0");
    }
    // |v|^2/(N-1) ~ Beta(3/2, 3(N-2)/2)
    double m = 1.0;
    const double a = 1.5;
    const double ab = 1.5 * (n - 1);
    for (int i = 0; i < k; ++i) {
        m *= (n - 1.0) * (a + i) / (ab + i);
    }
    return m;
}

double gaussian_moment(int k)
{
    double m = 1.0;
    for (int i = 0; i < k; ++i) {
        m *= (2.0 * i + 3.0) / 3.0;
    }
    return m;
}

} // namespace kac
