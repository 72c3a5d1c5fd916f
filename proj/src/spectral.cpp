#include "kac/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "kac/sampling.hpp"

namespace kac {

namespace {

constexpr std::uint64_t kTagKSpectrum = 0x4b53504543ULL;
constexpr std::uint64_t kTagKacForm = 0x4b4143464fULL;
constexpr std::uint64_t kTagConjForm = 0x434f4e4a46ULL;
constexpr std::uint64_t kTagVariance = 0x5641524eULL;
constexpr std::uint64_t kTagPairing = 0x50414952ULL;
constexpr std::uint64_t kTagPkS = 0x504b53ULL;
constexpr std::uint64_t kTagRecursion = 0x524543ULL;
constexpr std::uint64_t kTagProject = 0x50524f4aULL;

struct Jackknife {
    double full = 0.0;
    double std_error = 0.0;
};

template <class Stat>
Jackknife jackknife(const FormAssembly& fa, int groups, Stat stat)
{
    Eigen::MatrixXd A, B;
    fa.pooled(A, B);
    Jackknife out;
    out.full = stat(A, B);
    if (groups < 2) {
        return out;
    }
    std::vector<double> theta(static_cast<std::size_t>(groups));
    for (int g = 0; g < groups; ++g) {
        fa.pooled(A, B, groups, g);
        theta[g] = stat(A, B);
    }
    const double mean = std::accumulate(theta.begin(), theta.end(), 0.0) / groups;
    double ss = 0.0;
    for (double t : theta) {
        ss += (t - mean) * (t - mean);
    }
    out.std_error = std::sqrt(ss * (groups - 1.0) / groups);
    return out;
}

std::int64_t total_count(const FormAssembly& fa)
{
    return std::accumulate(fa.count.begin(), fa.count.end(), std::int64_t{0});
}

struct FormPart {
    Eigen::MatrixXd a;
    Eigen::MatrixXd f2;
    Eigen::VectorXd f1;
    std::int64_t n = 0;
};

FormAssembly collect(std::vector<FormPart>&& parts, int size)
{
    FormAssembly fa;
    fa.size = size;
    for (auto& p : parts) {
        fa.a.push_back(std::move(p.a));
        fa.f2.push_back(std::move(p.f2));
        fa.f1.push_back(std::move(p.f1));
        fa.count.push_back(p.n);
    }
    return fa;
}

FormPart empty_part(int k)
{
    return {Eigen::MatrixXd::Zero(k, k), Eigen::MatrixXd::Zero(k, k), Eigen::VectorXd::Zero(k), 0};
}

int basis_radial(const std::vector<TrialFunction>& family)
{
    for (const auto& f : family) {
        if (f.is_sum_form()) {
            return f.basis()->radial_deg();
        }
    }
    return 0;
}

int basis_angular(const std::vector<TrialFunction>& family)
{
    for (const auto& f : family) {
        if (f.is_sum_form()) {
            return f.basis()->angular_deg();
        }
    }
    return 0;
}

} // namespace

std::string to_json(const GapReport& r)
{
    nlohmann::ordered_json j;
    j["method"] = r.method;
    j["N"] = r.n;
    j["alpha"] = r.alpha;
    j["estimate"] = r.estimate;
    j["stderr"] = r.std_error;
    j["n_samples"] = r.n_samples;
    j["seed"] = r.seed;
    j["basis"] = {{"radial_deg", r.radial_deg}, {"angular_deg", r.angular_deg}};
    j["flagged"] = r.flagged;
    if (!r.note.empty()) {
        j["note"] = r.note;
    }
    if (r.coefficients.size() > 0) {
        j["coefficients"] = std::vector<double>(r.coefficients.data(), r.coefficients.data() + r.coefficients.size());
    }
    return j.dump(2);
}

// ---- K ----------------------------------------------------------------------

Estimate K_apply(const std::function<double(const Vec3&)>& phi, const Vec3& v, int n, std::int64_t n_samples,
                 Rng& rng)
{
    if (norm2(v) > (n - 1) * (1.0 + 1e-12)) {
        throw std::domain_error("K_apply: |v|^2 exceeds N-1");
    }
    if (n == 2) {
        return {phi(-v), 0.0, 1};
    }
    MeanAcc acc;
    for (std::int64_t s = 0; s < n_samples; ++s) {
        const ParticleState x = sample_conditional_slice(v, 1, n, rng);
        acc.add(phi(x.v[0]));
    }
    return to_estimate(acc);
}

KSpectrum K_spectrum(int n, const SingleParticleBasis& basis, std::int64_t n_samples, Seed seed, Exec exec)
{
    if (n != basis.n()) {
        throw std::invalid_argument("K_spectrum: basis built for a different N");
    }
    if (n_samples < 1) {
        throw std::invalid_argument("K_spectrum: need samples");
    }
    const int m = basis.size();
    const int np = basis.radial_deg() + 1;
    const int nl = basis.angular_deg() + 1;
    struct Link {
        int a, c, l, p, q;
    };
    std::vector<Link> links;
    for (int a = 0; a < m; ++a) {
        for (int c = 0; c < m; ++c) {
            const auto& ma = basis.member(a);
            const auto& mc = basis.member(c);
            if (ma.l == mc.l && ma.m == mc.m) {
                links.push_back({a, c, ma.l, ma.p, mc.p});
            }
        }
    }
    struct Part {
        std::vector<Eigen::MatrixXd> k, g;
        std::int64_t n = 0;
    };
    auto parts = run_batches<Part>(kBatches, exec, [&](int b) {
        Rng rng = make_stream(seed, kTagKSpectrum, static_cast<std::uint64_t>(b));
        Part p;
        p.k.assign(static_cast<std::size_t>(nl), Eigen::MatrixXd::Zero(np, np));
        p.g = p.k;
        std::vector<double> vals(static_cast<std::size_t>(m));
        Eigen::VectorXd sum(m);
        std::vector<Eigen::MatrixXd> q(static_cast<std::size_t>(nl));
        const std::int64_t share = batch_share(n_samples, kBatches, b);
        for (std::int64_t s = 0; s < share; ++s) {
            const ParticleState x = sample_invariant_gauss(n, rng);
            sum.setZero();
            for (auto& qq : q) {
                qq = Eigen::MatrixXd::Zero(np, np);
            }
            // q[l](p, p') accumulates sum_i sum_m eta_{lmp}(v_i) eta_{lmp'}(v_i)
            for (int i = 0; i < n; ++i) {
                basis.eval(x.v[i], vals.data());
                for (int a = 0; a < m; ++a) {
                    sum[a] += vals[a];
                }
                for (const auto& e : links) {
                    q[e.l](e.p, e.q) += vals[e.a] * vals[e.c];
                }
            }
            for (const auto& e : links) {
                p.k[e.l](e.p, e.q) += sum[e.a] * sum[e.c];
            }
            for (int l = 0; l < nl; ++l) {
                p.k[l] -= q[l];
                p.g[l] += q[l];
            }
            ++p.n;
        }
        return p;
    });

    std::vector<Eigen::MatrixXd> kl(static_cast<std::size_t>(nl), Eigen::MatrixXd::Zero(np, np));
    std::vector<Eigen::MatrixXd> gl = kl;
    std::int64_t total = 0;
    for (const auto& p : parts) {
        for (int l = 0; l < nl; ++l) {
            kl[l] += p.k[l];
            gl[l] += p.g[l];
        }
        total += p.n;
    }
    KSpectrum out;
    out.n_samples = total;
    out.matrix = Eigen::MatrixXd::Zero(m, m);
    out.gram_min_eigenvalue = INFINITY;
    std::vector<std::pair<double, Eigen::VectorXd>> pairs;
    std::vector<int> sectors;
    for (int l = 0; l < nl; ++l) {
        const double deg = 2.0 * l + 1.0;
        Eigen::MatrixXd k = kl[l] / (deg * static_cast<double>(total) * n * (n - 1.0));
        Eigen::MatrixXd g = gl[l] / (deg * static_cast<double>(total) * n);
        k = 0.5 * (k + k.transpose()).eval();
        g = 0.5 * (g + g.transpose()).eval();
        const double gmin = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(g).eigenvalues().minCoeff();
        out.gram_min_eigenvalue = std::min(out.gram_min_eigenvalue, gmin);
        if (!(gmin > 0.5)) {
            throw std::runtime_error("K_spectrum: ill-conditioned Gram matrix in sector l=" + std::to_string(l) +
                                     " (min eigenvalue " + std::to_string(gmin) + "); increase n_samples");
        }
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(k, g);
        for (int a = 0; a < m; ++a) {
            const auto& ma = basis.member(a);
            if (ma.l != l) {
                continue;
            }
            for (int c = 0; c < m; ++c) {
                const auto& mc = basis.member(c);
                if (mc.l == l && mc.m == ma.m) {
                    out.matrix(a, c) = k(ma.p, mc.p);
                }
            }
        }
        for (int e = 0; e < np; ++e) {
            Eigen::VectorXd x = ges.eigenvectors().col(e);
            x.normalize();
            for (int mm = -l; mm <= l; ++mm) {
                Eigen::VectorXd full = Eigen::VectorXd::Zero(m);
                for (int pp = 0; pp < np; ++pp) {
                    full[basis.index_of(l, mm, pp)] = x[pp];
                }
                pairs.emplace_back(ges.eigenvalues()[e], std::move(full));
                sectors.push_back(l);
            }
        }
    }
    std::vector<std::size_t> order(pairs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pairs[a].first < pairs[b].first; });
    out.eigenvalues.resize(static_cast<Eigen::Index>(pairs.size()));
    out.eigenvectors.resize(m, static_cast<Eigen::Index>(pairs.size()));
    for (std::size_t i = 0; i < order.size(); ++i) {
        out.eigenvalues[static_cast<Eigen::Index>(i)] = pairs[order[i]].first;
        out.eigenvectors.col(static_cast<Eigen::Index>(i)) = pairs[order[i]].second;
        out.sector.push_back(sectors[order[i]]);
    }
    return out;
}

KClosedForm closed_form_k_eigenvalues(int n)
{
    const double m = n - 1.0;
    return {-1.0 / m, (5.0 * n - 3.0) / (3.0 * m * m * m), -(7.0 * n - 3.0) / (3.0 * m * m * m * m)};
}

P0Spectrum p0_block_spectrum(int n, std::span<const double> kappas)
{
    P0Spectrum out;
    out.mu0 = -INFINITY;
    for (double k : kappas) {
        if (k > 1.0 - 1e-9) {
            continue;
        }
        const double sym = (1.0 + (n - 1.0) * k) / n;
        const double anti = (1.0 - k) / n;
        out.candidates.push_back(sym);
        out.candidates.push_back(anti);
        out.mu0 = std::max({out.mu0, sym, anti});
    }
    if (out.candidates.empty()) {
        throw std::invalid_argument("p0_block_spectrum: no non-trivial eigenvalues supplied");
    }
    out.gap0 = 1.0 - out.mu0;
    return out;
}

double mu0_closed_form(int n)
{
    const double m = n - 1.0;
    return (3.0 * n - 1.0) / (3.0 * m * m);
}

// ---- Dirichlet forms -----------------------------------------------------------

void FormAssembly::pooled(Eigen::MatrixXd& A, Eigen::MatrixXd& B, int groups, int skip) const
{
    A = Eigen::MatrixXd::Zero(size, size);
    Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(size, size);
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(size);
    double n = 0.0;
    for (std::size_t b = 0; b < a.size(); ++b) {
        if (groups > 1 && static_cast<int>(b) % groups == skip) {
            continue;
        }
        A += a[b];
        s2 += f2[b];
        s1 += f1[b];
        n += static_cast<double>(count[b]);
    }
    if (n <= 0.0) {
        throw std::logic_error("FormAssembly::pooled: no samples");
    }
    A /= n;
    A = 0.5 * (A + A.transpose()).eval();
    const Eigen::VectorXd mean = s1 / n;
    B = s2 / n - mean * mean.transpose();
    B = 0.5 * (B + B.transpose()).eval();
}

FormAssembly assemble_kac(const FamilyEvaluator& family, const KernelSpec& kernel, std::int64_t n_samples, Seed seed,
                          KacFormOptions opts, Exec exec)
{
    const int n = family.n();
    const int kf = family.size();
    const double temp = opts.energy - norm2(opts.momentum);
    if (!(temp > 0.0)) {
        throw std::invalid_argument("assemble_kac: E must exceed |p|^2");
    }
    const double scale = std::sqrt(temp);
    const int all_pairs = n * (n - 1) / 2;
    const bool every_pair = all_pairs <= opts.max_pairs;
    const int pairs = every_pair ? all_pairs : opts.max_pairs;
    auto parts = run_batches<FormPart>(kBatches, exec, [&](int b) {
        Rng rng = make_stream(seed, kTagKacForm, static_cast<std::uint64_t>(b));
        FormPart p = empty_part(kf);
        Eigen::VectorXd fx(kf);
        std::vector<double> d(static_cast<std::size_t>(kf));
        std::vector<int> nz;
        std::vector<Vec3> scratch;
        std::uniform_int_distribution<int> pick(0, n - 1);
        const std::int64_t share = batch_share(n_samples, kBatches, b);
        auto one_pair = [&](const ParticleState& x, int i, int j) {
            const Vec3 yi = scale * x.v[i] + opts.momentum;
            const Vec3 yj = scale * x.v[j] + opts.momentum;
            const Vec3 rel = yi - yj;
            const double g = norm(rel);
            if (g == 0.0) {
                return;
            }
            const Vec3 sigma = sample_scatter_direction(rel / g, kernel, rng);
            const auto [ya, yb] = post_collision_pair(yi, yj, sigma);
            family.pair_delta(x.v, i, j, (ya - opts.momentum) / scale, (yb - opts.momentum) / scale, d.data(),
                              scratch);
            const double w = 0.5 * n * pow_alpha(g, kernel.alpha) / pairs;
            nz.clear();
            for (int a = 0; a < kf; ++a) {
                if (d[a] != 0.0) {
                    nz.push_back(a);
                }
            }
            for (int a : nz) {
                const double wa = w * d[a];
                for (int c : nz) {
                    p.a(a, c) += wa * d[c];
                }
            }
        };
        for (std::int64_t s = 0; s < share; ++s) {
            const ParticleState x = sample_invariant_gauss(n, rng);
            family.eval(x.v, fx.data());
            p.f1 += fx;
            p.f2.noalias() += fx * fx.transpose();
            if (every_pair) {
                for (int i = 0; i < n; ++i) {
                    for (int j = i + 1; j < n; ++j) {
                        one_pair(x, i, j);
                    }
                }
            } else {
                for (int r = 0; r < pairs; ++r) {
                    const int i = pick(rng);
                    int j = pick(rng);
                    while (j == i) {
                        j = pick(rng);
                    }
                    one_pair(x, std::min(i, j), std::max(i, j));
                }
            }
            ++p.n;
        }
        return p;
    });
    return collect(std::move(parts), kf);
}

FormAssembly assemble_conjugate(const FamilyEvaluator& family, double alpha, std::int64_t n_samples, Seed seed,
                                Exec exec)
{
    const int n = family.n();
    if (n < 3) {
        throw std::invalid_argument("assemble_conjugate: the conjugate process needs N >= 3");
    }
    const int kf = family.size();
    auto parts = run_batches<FormPart>(kBatches, exec, [&](int b) {
        Rng rng = make_stream(seed, kTagConjForm, static_cast<std::uint64_t>(b));
        FormPart p = empty_part(kf);
        Eigen::VectorXd fx(kf), f1(kf), f2(kf);
        const std::int64_t share = batch_share(n_samples, kBatches, b);
        for (std::int64_t s = 0; s < share; ++s) {
            const ParticleState x = sample_invariant_gauss(n, rng);
            family.eval(x.v, fx.data());
            p.f1 += fx;
            p.f2.noalias() += fx * fx.transpose();
            for (int k = 0; k < n; ++k) {
                const double w = weight_w_pow(x.v[k], n, alpha);
                const ParticleState y1 = sample_conditional_slice(x.v[k], k, n, rng);
                const ParticleState y2 = sample_conditional_slice(x.v[k], k, n, rng);
                if (w == 0.0) {
                    continue;
                }
                family.eval(y1.v, f1.data());
                family.eval(y2.v, f2.data());
                const Eigen::VectorXd d1 = fx - f1;
                const Eigen::VectorXd d2 = fx - f2;
                const double c = 0.5 * w / n;
                p.a.noalias() += c * (d1 * d2.transpose() + d2 * d1.transpose());
            }
            ++p.n;
        }
        return p;
    });
    return collect(std::move(parts), kf);
}

Estimate dirichlet_kac(const TrialFunction& f, const TrialFunction& g, const KernelSpec& kernel,
                       std::int64_t n_samples, Seed seed, KacFormOptions opts, Exec exec)
{
    FamilyEvaluator fam({f, g});
    const auto fa = assemble_kac(fam, kernel, n_samples, seed, opts, exec);
    const auto jk = jackknife(fa, kBatches, [](const Eigen::MatrixXd& A, const Eigen::MatrixXd&) { return A(0, 1); });
    return {jk.full, jk.std_error, total_count(fa)};
}

Estimate dirichlet_conjugate(const TrialFunction& f, double alpha, std::int64_t n_samples, Seed seed, Exec exec)
{
    FamilyEvaluator fam({f});
    const auto fa = assemble_conjugate(fam, alpha, n_samples, seed, exec);
    const auto jk = jackknife(fa, kBatches, [](const Eigen::MatrixXd& A, const Eigen::MatrixXd&) { return A(0, 0); });
    return {jk.full, jk.std_error, total_count(fa)};
}

Estimate variance_mc(const TrialFunction& f, std::int64_t n_samples, Seed seed, Exec exec)
{
    auto parts = run_batches<MeanAcc>(kBatches, exec, [&](int b) {
        Rng rng = make_stream(seed, kTagVariance, static_cast<std::uint64_t>(b));
        MeanAcc acc;
        const std::int64_t share = batch_share(n_samples, kBatches, b);
        for (std::int64_t s = 0; s < share; ++s) {
            acc.add(f(sample_invariant_gauss(f.n(), rng)));
        }
        return acc;
    });
    MeanAcc batch_var;
    for (const auto& p : parts) {
        if (p.n > 1) {
            batch_var.add(p.variance());
        }
    }
    const MeanAcc all = merge_ordered(parts);
    return {all.variance(), batch_var.std_error(), all.n};
}

PairingCheck generator_pairing(ProcessKind process, const TrialFunction& f, const TrialFunction& g,
                               const KernelSpec& kernel, std::int64_t n_samples, Seed seed, Exec exec)
{
    const int n = f.n();
    if (process == ProcessKind::Conjugate && n < 3) {
        throw std::invalid_argument("generator_pairing: the conjugate process needs N >= 3");
    }
    struct Part {
        MeanAcc gl, fl, diff;
        void merge(const Part& o)
        {
            gl.merge(o.gl);
            fl.merge(o.fl);
            diff.merge(o.diff);
        }
    };
    FamilyEvaluator fam({f, g});
    const double npairs = n * (n - 1) / 2.0;
    auto parts = run_batches<Part>(kBatches, exec, [&](int b) {
        Rng rng = make_stream(seed, kTagPairing, static_cast<std::uint64_t>(b));
        Part p;
        double v0[2], v1[2];
        std::vector<Vec3> scratch;
        std::uniform_int_distribution<int> pick(0, n - 1);
        const std::int64_t share = batch_share(n_samples, kBatches, b);
        for (std::int64_t s = 0; s < share; ++s) {
            const ParticleState x = sample_invariant_gauss(n, rng);
            fam.eval(x.v, v0);
            double lf = 0.0, lg = 0.0;
            if (process == ProcessKind::Kac) {
                const int i = pick(rng);
                int j = pick(rng);
                while (j == i) {
                    j = pick(rng);
                }
                const Vec3 rel = x.v[i] - x.v[j];
                const double gap = norm(rel);
                if (gap > 0.0) {
                    const Vec3 sigma = sample_scatter_direction(rel / gap, kernel, rng);
                    const auto [a, c] = post_collision_pair(x.v[i], x.v[j], sigma);
                    double d[2];
                    fam.pair_delta(x.v, i, j, a, c, d, scratch);
                    const double rate = npairs * pair_rate(x, i, j, kernel.alpha);
                    lf = -rate * d[0];
                    lg = -rate * d[1];
                }
            } else {
                const int k = pick(rng);
                const ParticleState y = sample_conditional_slice(x.v[k], k, n, rng);
                fam.eval(y.v, v1);
                const double rate = weight_w_pow(x.v[k], n, kernel.alpha); // N * lambda_k
                lf = rate * (v1[0] - v0[0]);
                lg = rate * (v1[1] - v0[1]);
            }
            p.gl.add(v0[1] * lf);
            p.fl.add(v0[0] * lg);
            p.diff.add(v0[1] * lf - v0[0] * lg);
        }
        return p;
    });
    const Part all = merge_ordered(parts);
    return {to_estimate(all.gl), to_estimate(all.fl), to_estimate(all.diff)};
}

// ---- gap estimators ------------------------------------------------------------

double min_generalized_eigenvalue(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, Eigen::VectorXd* argmin)
{
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eb(B);
    const double cut = 1e-8 * B.trace();
    std::vector<int> keep;
    for (int i = 0; i < B.rows(); ++i) {
        if (eb.eigenvalues()[i] > cut) {
            keep.push_back(i);
        }
    }
    if (keep.empty()) {
        throw std::runtime_error("min_generalized_eigenvalue: covariance matrix is singular");
    }
    Eigen::MatrixXd t(B.rows(), static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) {
        t.col(static_cast<Eigen::Index>(c)) = eb.eigenvectors().col(keep[c]) / std::sqrt(eb.eigenvalues()[keep[c]]);
    }
    const Eigen::MatrixXd m = t.transpose() * A * t;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> em(0.5 * (m + m.transpose()));
    if (argmin) {
        *argmin = t * em.eigenvectors().col(0);
    }
    return em.eigenvalues()[0];
}

GapReport variational_gap(ProcessKind process, const KernelSpec& kernel, const std::vector<TrialFunction>& family,
                          std::int64_t n_samples, Seed seed, int replicas, Exec exec)
{
    if (family.empty()) {
        throw std::invalid_argument("variational_gap: empty trial family");
    }
    FamilyEvaluator fam(family);
    const FormAssembly fa = process == ProcessKind::Kac ? assemble_kac(fam, kernel, n_samples, seed, {}, exec)
                                                        : assemble_conjugate(fam, kernel.alpha, n_samples, seed, exec);
    GapReport r;
    r.method = process == ProcessKind::Kac ? "variational-kac" : "variational-conjugate";
    r.n = fam.n();
    r.alpha = kernel.alpha;
    r.seed = seed.value;
    r.n_samples = total_count(fa);
    r.radial_deg = basis_radial(family);
    r.angular_deg = basis_angular(family);
    Eigen::MatrixXd A, B;
    fa.pooled(A, B);
    r.estimate = min_generalized_eigenvalue(A, B, &r.coefficients);
    const auto jk = jackknife(fa, std::max(2, replicas), [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
        return min_generalized_eigenvalue(a, b, nullptr);
    });
    r.std_error = jk.std_error;
    if (process == ProcessKind::Kac && r.n == 2) {
        std::ostringstream note;
        note << "N=2 closed form 2^(alpha+1) = " << std::pow(2.0, kernel.alpha + 1.0)
             << " for this generator; the half-rate normalization gives " << std::pow(2.0, kernel.alpha);
        r.note = note.str();
    }
    return r;
}

TrialFunction combine(const std::vector<TrialFunction>& family, const Eigen::VectorXd& coefficients, std::string name)
{
    if (family.empty() || static_cast<Eigen::Index>(family.size()) != coefficients.size()) {
        throw std::invalid_argument("combine: family and coefficient sizes differ");
    }
    bool all_sum = true;
    for (const auto& f : family) {
        all_sum = all_sum && f.is_sum_form() && f.basis() == family.front().basis();
    }
    if (all_sum) {
        Eigen::MatrixXd c = Eigen::MatrixXd::Zero(family.front().coeffs().rows(), family.front().coeffs().cols());
        for (std::size_t k = 0; k < family.size(); ++k) {
            c += coefficients[static_cast<Eigen::Index>(k)] * family[k].coeffs();
        }
        return TrialFunction::sum_form(family.front().basis(), std::move(c), std::move(name));
    }
    auto fam = family;
    Eigen::VectorXd w = coefficients;
    return TrialFunction::opaque(
        family.front().n(),
        [fam, w](std::span<const Vec3> v) {
            double acc = 0.0;
            for (std::size_t k = 0; k < fam.size(); ++k) {
                acc += w[static_cast<Eigen::Index>(k)] * fam[k](v);
            }
            return acc;
        },
        std::move(name));
}

// ---- decomposition ---------------------------------------------------------------

Decomposition trial_decompose(const TrialFunction& f)
{
    if (!f.is_sum_form()) {
        throw std::invalid_argument("trial_decompose: needs a sum form");
    }
    if (f.basis()->radial_deg() < 1) {
        throw std::invalid_argument("trial_decompose: basis lacks the |v|^2 member");
    }
    const Eigen::MatrixXd& c = f.coeffs();
    if (c.col(0).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, c.cwiseAbs().maxCoeff())) {
        throw std::invalid_argument("trial_decompose: some phi_j has a nonzero mean");
    }
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(c.rows(), c.cols());
    Eigen::MatrixXd g = c;
    g.col(0).setZero();
    Eigen::Vector4d t;
    for (int i = 1; i <= 4; ++i) {
        t[i - 1] = c.col(i).mean();
        s.col(i) = c.col(i).array() - t[i - 1];
        g.col(i).setZero();
    }
    Decomposition d{TrialFunction::sum_form(f.basis(), g, f.name() + ".g"),
                    TrialFunction::sum_form(f.basis(), s, f.name() + ".s"), std::nullopt, t, (g + s).squaredNorm()};
    return d;
}

Decomposition trial_decompose(const TrialFunction& sum_part, const TrialFunction& h)
{
    Decomposition d = trial_decompose(sum_part);
    d.h = h;
    return d;
}

PkSReport verify_Pk_s(const TrialFunction& s, int n_states, std::int64_t inner_samples, Seed seed)
{
    if (!s.is_sum_form()) {
        throw std::invalid_argument("verify_Pk_s: needs the sum-form part s");
    }
    const int n = s.n();
    const auto& basis = *s.basis();
    PkSReport rep;
    rep.stated_factor = (n - 2.0) / (n - 1.0);
    rep.derived_factor = n / (n - 1.0);
    struct Point {
        double mean = 0.0, se = 0.0, psi = 0.0;
    };
    auto per_state = run_batches<std::vector<Point>>(n_states, Exec::Parallel, [&](int st) {
        Rng rng = make_stream(seed, kTagPkS, static_cast<std::uint64_t>(st));
        const ParticleState x = sample_invariant_gauss(n, rng);
        std::vector<Point> pts;
        for (int k = 0; k < n; ++k) {
            MeanAcc acc;
            for (std::int64_t r = 0; r < inner_samples; ++r) {
                acc.add(s(sample_conditional_slice(x.v[k], k, n, rng)));
            }
            double psi = 0.0;
            for (int i = 1; i <= 4; ++i) {
                psi += s.coeffs()(k, i) * basis.eval_one(i, x.v[k]);
            }
            pts.push_back({acc.mean, acc.std_error(), psi});
        }
        return pts;
    });
    for (const auto& pts : per_state) {
        for (const auto& p : pts) {
            if (!(p.se > 0.0)) {
                continue;
            }
            const double zs = (p.mean - rep.stated_factor * p.psi) / p.se;
            const double zd = (p.mean - rep.derived_factor * p.psi) / p.se;
            rep.chi2_stated += zs * zs;
            rep.chi2_derived += zd * zd;
            rep.max_abs_z_stated = std::max(rep.max_abs_z_stated, std::abs(zs));
            rep.max_abs_z_derived = std::max(rep.max_abs_z_derived, std::abs(zd));
            ++rep.points;
        }
    }
    const double dof = rep.points;
    const double limit = dof + 5.0 * std::sqrt(2.0 * dof);
    rep.stated_pass = rep.points > 0 && rep.chi2_stated <= limit;
    rep.derived_pass = rep.points > 0 && rep.chi2_derived <= limit;
    return rep;
}

RecursionReport recursion_check(const TrialFunction& f, const KernelSpec& kernel, std::int64_t n_samples, Seed seed,
                                Exec exec)
{
    const int n = f.n();
    if (n < 3) {
        throw std::invalid_argument("recursion_check: needs N >= 3");
    }
    RecursionReport rep;
    rep.direct = dirichlet_kac(f, f, kernel, n_samples, child_seed(seed, 1), {}, exec);

    FamilyEvaluator fam({f});
    const int inner = n - 1;
    const int inner_pairs = inner * (inner - 1) / 2;
    const double root = std::sqrt(n - 1.0);
    auto parts = run_batches<MeanAcc>(kBatches, exec, [&](int b) {
        Rng rng = make_stream(child_seed(seed, 2), kTagRecursion, static_cast<std::uint64_t>(b));
        std::uniform_int_distribution<int> pick_k(0, n - 1);
        MeanAcc acc;
        std::vector<Vec3> scratch;
        double d = 0.0;
        const std::int64_t share = batch_share(n_samples, kBatches, b);
        for (std::int64_t s = 0; s < share; ++s) {
            const BallPoint v = sample_nu(n, rng);
            const ParticleState y = sample_invariant_gauss(inner, rng);
            const int k = pick_k(rng);
            const ParticleState x = lift_Tk(y, v, k);
            const double beta = std::sqrt(std::max(0.0, (n / (n - 1.0)) * (1.0 - norm2(v.v))));
            double cond = 0.0;
            for (int i = 0; i < inner; ++i) {
                for (int j = i + 1; j < inner; ++j) {
                    const Vec3 rel = y.v[i] - y.v[j];
                    const double g = norm(rel);
                    if (g == 0.0) {
                        continue;
                    }
                    const Vec3 sigma = sample_scatter_direction(rel / g, kernel, rng);
                    const auto [a, c] = post_collision_pair(y.v[i], y.v[j], sigma);
                    const int si = i < k ? i : i + 1;
                    const int sj = j < k ? j : j + 1;
                    fam.pair_delta(x.v, si, sj, beta * a - v.v / root, beta * c - v.v / root, &d, scratch);
                    cond += pow_alpha(g, kernel.alpha) * d * d;
                }
            }
            // E_{N-1,alpha}(f | v_k) = ((N-1)/2) * mean over inner pairs
            cond *= 0.5 * inner / inner_pairs;
            acc.add((n / (n - 1.0)) * pow_alpha(beta, kernel.alpha) * cond);
        }
        return acc;
    });
    rep.conditional = to_estimate(merge_ordered(parts));
    rep.z = z_score(rep.direct.value, rep.direct.std_error, rep.conditional.value, rep.conditional.std_error);
    return rep;
}

TrialFunction null_space_example(int n, int variant)
{
    switch (variant) {
    case 0:
        if (n < 3) {
            break;
        }
        return TrialFunction::opaque(
            n, [](std::span<const Vec3> v) { return cross(v[0], v[1]).z; }, "cross12", true);
    case 1:
        if (n < 4) {
            break;
        }
        return TrialFunction::opaque(
            n, [](std::span<const Vec3> v) { return dot(v[0] - v[1], v[2] - v[3]); }, "diffdot1234", true);
    case 2:
        if (n < 3) {
            break;
        }
        return TrialFunction::opaque(
            n, [](std::span<const Vec3> v) { return cross(v[0], v[1]).z * (norm2(v[0]) + norm2(v[1])); },
            "cross12_energy", true);
    default:
        break;
    }
    throw std::invalid_argument("null_space_example: unknown variant or N too small");
}

TrialFunction project_out_sum_forms(const TrialFunction& f, const BasisPtr& basis, std::int64_t n_samples, Seed seed)
{
    const int n = f.n();
    const int m = basis->size();
    const int cols = 1 + n * (m - 1);
    Eigen::MatrixXd xtx = Eigen::MatrixXd::Zero(cols, cols);
    Eigen::VectorXd xty = Eigen::VectorXd::Zero(cols);
    Eigen::VectorXd row(cols);
    std::vector<double> b(static_cast<std::size_t>(m));
    Rng rng = make_stream(seed, kTagProject, 0);
    auto fill = [&](std::span<const Vec3> v) {
        row[0] = 1.0;
        for (int j = 0; j < n; ++j) {
            basis->eval(v[j], b.data());
            for (int i = 1; i < m; ++i) {
                row[1 + j * (m - 1) + (i - 1)] = b[i];
            }
        }
    };
    for (std::int64_t s = 0; s < n_samples; ++s) {
        const ParticleState x = sample_invariant_gauss(n, rng);
        fill(x.v);
        xtx.selfadjointView<Eigen::Lower>().rankUpdate(row);
        xty += f(x) * row;
    }
    xtx.triangularView<Eigen::StrictlyUpper>() = xtx.transpose();
    const Eigen::VectorXd coef = xtx.completeOrthogonalDecomposition().solve(xty);
    auto basis_copy = basis;
    return TrialFunction::opaque(
        n,
        [f, coef, basis_copy, n, m](std::span<const Vec3> v) {
            std::vector<double> bb(static_cast<std::size_t>(m));
            double proj = coef[0];
            for (int j = 0; j < n; ++j) {
                basis_copy->eval(v[j], bb.data());
                for (int i = 1; i < m; ++i) {
                    proj += coef[1 + j * (m - 1) + (i - 1)] * bb[i];
                }
            }
            return f(v) - proj;
        },
        f.name() + "_perp", true);
}

void write_matrix_csv(const Eigen::MatrixXd& m, std::ostream& out)
{
    out.precision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out << (j ? "," : "") << m(i, j);
        }
        out << '\n';
    }
}

} // namespace kac
