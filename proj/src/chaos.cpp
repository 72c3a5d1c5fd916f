#include "kac/chaos.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

#include "kac/basis.hpp"
#include "kac/core.hpp"
#include "kac/sampling.hpp"
#include "kac/spectral.hpp"

namespace kac {

namespace {

constexpr std::uint64_t kTagMoments = 0x4d4f4dULL;
constexpr std::uint64_t kTagCond1 = 0x434e4431ULL;
constexpr std::uint64_t kTagCond2 = 0x434e4432ULL;
constexpr std::uint64_t kTagCond8 = 0x434e4438ULL;
constexpr std::uint64_t kTagWdev = 0x57444556ULL;
constexpr std::uint64_t kTagJoint = 0x4a4f494eULL;

double pow_int(double x, int k)
{
    double r = 1.0;
    for (int i = 0; i < k; ++i) {
        r *= x;
    }
    return r;
}

// E|c y + u|^4 for y isotropic with E|y|^2 = 1, E|y|^4 = m4.
double shifted_fourth(double c2, double m4, double u2)
{
    return c2 * c2 * m4 + (4.0 / 3.0 + 2.0) * c2 * u2 + u2 * u2;
}

Estimate conditional_mc(int n, std::span<const int> idx, std::span<const Vec3> vals, int power, std::int64_t n_samples,
                        Seed seed, std::uint64_t tag)
{
    auto parts = run_batches<MeanAcc>(kBatches, Exec::Parallel, [&](int b) {
        Rng rng = make_stream(seed, tag, static_cast<std::uint64_t>(b));
        MeanAcc acc;
        const std::int64_t share = batch_share(n_samples, kBatches, b);
        for (std::int64_t s = 0; s < share; ++s) {
            const ParticleState x = sample_conditional_fixed(idx, vals, n, rng);
            acc.add(pow_int(norm2(x.v[0]), power / 2));
        }
        return acc;
    });
    return to_estimate(merge_ordered(parts));
}

} // namespace

std::vector<MomentReport> marginal_moments(int n, std::span<const int> orders, std::int64_t n_samples, Seed seed,
                                           Exec exec)
{
    for (int m : orders) {
        if (m < 0 || m % 2 != 0) {
            throw std::invalid_argument("marginal_moments: orders must be even and non-negative");
        }
    }
    const std::size_t no = orders.size();
    struct Part {
        std::vector<MeanAcc> acc;
        void merge(const Part& o)
        {
            if (acc.empty()) {
                acc = o.acc;
                return;
            }
            for (std::size_t i = 0; i < acc.size(); ++i) {
                acc[i].merge(o.acc[i]);
            }
        }
    };
    auto parts = run_batches<Part>(kBatches, exec, [&](int b) {
        Rng rng = make_stream(seed, kTagMoments, static_cast<std::uint64_t>(b));
        Part p;
        p.acc.resize(no);
        const std::int64_t share = batch_share(n_samples, kBatches, b);
        std::vector<double> sums(no);
        for (std::int64_t s = 0; s < share; ++s) {
            const ParticleState x = sample_invariant_recursive(n, rng);
            std::fill(sums.begin(), sums.end(), 0.0);
            for (const auto& v : x.v) {
                const double r2 = norm2(v);
                for (std::size_t i = 0; i < no; ++i) {
                    sums[i] += pow_int(r2, orders[i] / 2);
                }
            }
            for (std::size_t i = 0; i < no; ++i) {
                p.acc[i].add(sums[i] / n);
            }
        }
        return p;
    });
    const Part all = merge_ordered(parts);
    std::vector<MomentReport> out;
    for (std::size_t i = 0; i < no; ++i) {
        MomentReport r;
        r.n = n;
        r.observable = "E|v1|^" + std::to_string(orders[i]);
        r.estimate = all.acc[i].mean;
        r.std_error = all.acc[i].std_error();
        r.reference = exact_marginal_moment(n, orders[i] / 2);
        r.gaussian_reference = gaussian_moment(orders[i] / 2);
        r.provenance = "exact Beta marginal";
        out.push_back(r);
    }
    return out;
}

CondMoment cond_moment4_one(int n, const Vec3& v, std::int64_t n_samples, Seed seed)
{
    if (n < 3) {
        throw std::invalid_argument("cond_moment4_one: need N >= 3");
    }
    const double a = norm2(v);
    if (a > (n - 1) * (1.0 + 1e-12)) {
        throw std::domain_error("cond_moment4_one: |v|^2 exceeds N-1");
    }
    const int idx[1] = {n - 1};
    const Vec3 vals[1] = {v};
    CondMoment out;
    out.mc = conditional_mc(n, idx, vals, 4, n_samples, seed, kTagCond1);
    const double m = n - 1.0;
    out.s = (n * n + a * a - 2.0 * n * a) / (m * m);
    const double m4 = exact_marginal_moment(n - 1, 2);
    out.scaled_s = m4 * out.s;
    const double c2 = std::max(0.0, (n / m) * (1.0 - a / m));
    out.exact = shifted_fourth(c2, m4, a / (m * m));
    return out;
}

CondMoment cond_moment4_two(int n, const Vec3& v, const Vec3& w, std::int64_t n_samples, Seed seed)
{
    if (n < 4) {
        throw std::invalid_argument("cond_moment4_two: need N >= 4");
    }
    const double a = norm2(v);
    const double b = norm2(w);
    const double m = n - 2.0;
    const Vec3 p = v + w;
    const double c2 = (n - a - b - norm2(p) / m) / m;
    if (c2 < -1e-12) {
        throw std::domain_error("cond_moment4_two: (v, w) cannot be extended to a state");
    }
    const int idx[2] = {n - 2, n - 1};
    const Vec3 vals[2] = {v, w};
    CondMoment out;
    out.mc = conditional_mc(n, idx, vals, 4, n_samples, seed, kTagCond2);
    out.s = (n * n + a * a + b * b + 2.0 * n * a + 2.0 * n * b + 2.0 * a * b) / (m * m);
    const double m4 = exact_marginal_moment(n - 2, 2);
    out.scaled_s = m4 * (n - a - b) * (n - a - b) / (m * m);
    out.exact = shifted_fourth(std::max(0.0, c2), m4, norm2(p) / (m * m));
    return out;
}

Estimate cond_moment8_one(int n, const Vec3& v, std::int64_t n_samples, Seed seed)
{
    const int idx[1] = {1};
    const Vec3 vals[1] = {v};
    return conditional_mc(n, idx, vals, 8, n_samples, seed, kTagCond8);
}

std::vector<Vec3> conditional_grid(int n)
{
    std::vector<Vec3> out;
    for (double r : {0.0, 0.5, 1.0, 1.5, std::sqrt((n - 1.0) / 2.0)}) {
        out.push_back({r, 0.0, 0.0});
    }
    return out;
}

Estimate wdev_lp(int n, double alpha, double p, std::int64_t n_samples, Seed seed, Exec exec)
{
    if (p < 1.0) {
        throw std::invalid_argument("wdev_lp: p must be at least 1");
    }
    if (alpha == 0.0) {
        return {0.0, 0.0, n_samples};
    }
    auto parts = run_batches<MeanAcc>(kBatches, exec, [&](int b) {
        Rng rng = make_stream(seed, kTagWdev, static_cast<std::uint64_t>(b));
        MeanAcc acc;
        const std::int64_t share = batch_share(n_samples, kBatches, b);
        for (std::int64_t s = 0; s < share; ++s) {
            const ParticleState x = sample_invariant_gauss(n, rng);
            double sum = 0.0;
            for (const auto& v : x.v) {
                sum += std::pow(std::abs(weight_w_pow(v, n, alpha) - 1.0), p);
            }
            acc.add(sum / n);
        }
        return acc;
    });
    const MeanAcc all = merge_ordered(parts);
    const double value = std::pow(all.mean, 1.0 / p);
    const double se = all.mean > 0.0 ? value / (p * all.mean) * all.std_error() : 0.0;
    return {value, se, all.n};
}

double wdev_alpha2_p2_exact(int n)
{
    // w - 1 = (N - 1 - N |v|^2)/(N-1)^2
    const double m = n - 1.0;
    const double e2 = exact_marginal_moment(n, 2);
    return (m * m - 2.0 * m * n + n * n * e2) / (m * m * m * m);
}

JointChaosReport joint_chaos_test(int n, int k, std::int64_t n_samples, Seed seed, Exec exec)
{
    if (k < 2 || k > n) {
        throw std::invalid_argument("joint_chaos_test: need 2 <= k <= N");
    }
    const auto basis = std::make_shared<const SingleParticleBasis>(n, 2, 2);
    std::vector<int> high;
    for (int i = 5; i < basis->size(); ++i) {
        const auto& m = basis->member(i);
        if (m.l + 2 * m.p <= 4) {
            high.push_back(i);
        }
    }
    const int nh = static_cast<int>(high.size());
    struct Part {
        MeanAcc dot, energy;
        std::vector<MeanAcc> cov;
        void merge(const Part& o)
        {
            dot.merge(o.dot);
            energy.merge(o.energy);
            if (cov.empty()) {
                cov = o.cov;
                return;
            }
            for (std::size_t i = 0; i < cov.size(); ++i) {
                cov[i].merge(o.cov[i]);
            }
        }
    };
    auto parts = run_batches<Part>(kBatches, exec, [&](int b) {
        Rng rng = make_stream(seed, kTagJoint, static_cast<std::uint64_t>(b));
        Part p;
        p.cov.resize(static_cast<std::size_t>(nh * nh));
        const std::int64_t share = batch_share(n_samples, kBatches, b);
        std::vector<std::vector<double>> vals(static_cast<std::size_t>(k));
        const double npairs = k * (k - 1.0);
        for (std::int64_t s = 0; s < share; ++s) {
            const ParticleState x = sample_invariant_gauss(n, rng);
            for (int i = 0; i < k; ++i) {
                vals[i] = basis->eval(x.v[i]);
            }
            double dot_acc = 0.0, e_acc = 0.0;
            std::vector<double> c(static_cast<std::size_t>(nh * nh), 0.0);
            for (int i = 0; i < k; ++i) {
                for (int j = 0; j < k; ++j) {
                    if (i == j) {
                        continue;
                    }
                    dot_acc += dot(x.v[i], x.v[j]);
                    e_acc += norm2(x.v[i]) * norm2(x.v[j]);
                    for (int a = 0; a < nh; ++a) {
                        for (int bb = 0; bb < nh; ++bb) {
                            c[a * nh + bb] += vals[i][high[a]] * vals[j][high[bb]];
                        }
                    }
                }
            }
            p.dot.add(dot_acc / npairs);
            p.energy.add(e_acc / npairs - 1.0);
            for (int a = 0; a < nh * nh; ++a) {
                p.cov[a].add(c[a] / npairs);
            }
        }
        return p;
    });
    const Part all = merge_ordered(parts);
    JointChaosReport r;
    r.n = n;
    r.k = k;
    r.v1v2 = to_estimate(all.dot);
    r.v1v2_reference = -1.0 / (n - 1.0);
    r.energy_cov = to_estimate(all.energy);
    r.energy_cov_reference = -(exact_marginal_moment(n, 2) - 1.0) / (n - 1.0);
    r.high_mode_bound = closed_form_k_eigenvalues(n).top;
    bool ok = true;
    for (const auto& c : all.cov) {
        if (std::abs(c.mean) > r.max_high_mode_cov) {
            r.max_high_mode_cov = std::abs(c.mean);
            r.max_high_mode_se = c.std_error();
        }
        ok = ok && std::abs(c.mean) <= r.high_mode_bound + 3.0 * c.std_error();
    }
    ok = ok && z_score(r.v1v2.value, r.v1v2.std_error, r.v1v2_reference, 0.0) <= 3.0;
    ok = ok && z_score(r.energy_cov.value, r.energy_cov.std_error, r.energy_cov_reference, 0.0) <= 3.0;
    r.pass = ok;
    return r;
}

CFit fit_c_over_n(std::span<const int> ns, std::span<const double> deviations)
{
    if (ns.size() != deviations.size() || ns.empty()) {
        throw std::invalid_argument("fit_c_over_n: need matching, nonempty sweeps");
    }
    CFit f;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        f.scaled.push_back(ns[i] * deviations[i]);
        f.c += f.scaled.back();
    }
    f.c /= static_cast<double>(ns.size());
    f.stable = true;
    for (double s : f.scaled) {
        f.stable = f.stable && std::abs(s - f.c) <= 0.5 * std::abs(f.c);
    }
    return f;
}

} // namespace kac
