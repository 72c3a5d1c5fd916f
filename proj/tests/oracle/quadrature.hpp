#pragma once

// Independent quadrature oracle for the one- and two-particle laws of sigma_N.
// Nothing here calls the library's samplers or basis: nodes come from
// Golub-Welsch on the Jacobi recurrence, and the conditional law of v_1 given
// v_2 is written out by hand.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <vector>

namespace oracle {

struct Rule {
    std::vector<double> x; // nodes
    std::vector<double> w; // weights, summing to 1
};

/// Gauss-Jacobi rule for the probability weight proportional to
/// (1-x)^a (1+x)^b on [-1, 1].
inline Rule gauss_jacobi(int n, double a, double b)
{
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        const double s = 2.0 * k + a + b;
        j(k, k) = (k == 0) ? (b - a) / (a + b + 2.0) : (b * b - a * a) / (s * (s + 2.0));
        if (k + 1 < n) {
            const double m = k + 1.0;
            const double t = 2.0 * m + a + b;
            const double off = std::sqrt(4.0 * m * (m + a) * (m + b) * (m + a + b) / (t * t * (t + 1.0) * (t - 1.0)));
            j(k, k + 1) = off;
            j(k + 1, k) = off;
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    Rule r;
    for (int k = 0; k < n; ++k) {
        r.x.push_back(es.eigenvalues()[k]);
        const double v = es.eigenvectors()(0, k);
        r.w.push_back(v * v);
    }
    return r;
}

inline Rule gauss_legendre(int n) { return gauss_jacobi(n, 0.0, 0.0); }

/// Rule for s ~ Beta(p, q) on [0, 1].
inline Rule beta_rule(int n, double p, double q)
{
    Rule r = gauss_jacobi(n, q - 1.0, p - 1.0);
    for (double& x : r.x) {
        x = 0.5 * (1.0 + x);
    }
    return r;
}

/// E g(|v_1|^2) under sigma_N: |v_1|^2 = (N-1) s, s ~ Beta(3/2, 3(N-2)/2).
inline double marginal_expectation(int n, const std::function<double(double)>& g, int nodes = 40)
{
    if (n == 2) {
        return g(1.0);
    }
    const Rule r = beta_rule(nodes, 1.5, 1.5 * (n - 2));
    double acc = 0.0;
    for (std::size_t i = 0; i < r.x.size(); ++i) {
        acc += r.w[i] * g((n - 1.0) * r.x[i]);
    }
    return acc;
}

/// E F(|v_1|^2, |v_2|^2, v_1 . v_2) under sigma_N, N >= 3.
/// Given v_2 = v, v_1 = -v/(N-1) + c rho u with c^2 = (N-2)/(N-1) (N - |v|^2 N/(N-1)),
/// u uniform on S^2 and rho^2 ~ Beta(3/2, 3(N-3)/2) (rho = 1 when N = 3).
inline double pair_expectation(int n, const std::function<double(double, double, double)>& f, int nodes = 24)
{
    const double m = n - 1.0;
    const Rule outer = beta_rule(nodes, 1.5, 1.5 * (n - 2));
    const Rule inner = n > 3 ? beta_rule(nodes, 1.5, 1.5 * (n - 3)) : Rule{{1.0}, {1.0}};
    const Rule cosine = gauss_legendre(nodes);
    double acc = 0.0;
    for (std::size_t i = 0; i < outer.x.size(); ++i) {
        const double a2 = m * outer.x[i];
        const double a = std::sqrt(a2);
        const double rest = n - a2 - a2 / m; // energy left for the centred N-1 particles
        const double c = std::sqrt(std::max(0.0, rest * (m - 1.0) / m));
        for (std::size_t j = 0; j < inner.x.size(); ++j) {
            const double rho = std::sqrt(inner.x[j]);
            for (std::size_t k = 0; k < cosine.x.size(); ++k) {
                const double t = cosine.x[k];
                const double b = c * rho;
                const double s1 = a2 / (m * m) + b * b - 2.0 * a * b * t / m;
                const double dot = -a2 / m + a * b * t;
                acc += outer.w[i] * inner.w[j] * cosine.w[k] * f(s1, a2, dot);
            }
        }
    }
    return acc;
}

/// Eigenvalues of K restricted to sector l in {0, 1} with monomial radial
/// degree <= p_max, from the generalised problem <phi_a, K phi_b> x = k <phi_a, phi_b> x.
inline Eigen::VectorXd k_sector_eigenvalues(int n, int l, int p_max)
{
    const int m = p_max + 1;
    Eigen::MatrixXd kmat(m, m);
    Eigen::MatrixXd gram(m, m);
    for (int p = 0; p < m; ++p) {
        for (int q = 0; q < m; ++q) {
            if (l == 0) {
                kmat(p, q) = pair_expectation(n, [&](double s1, double s2, double) {
                    return std::pow(s1, p) * std::pow(s2, q);
                });
                gram(p, q) = marginal_expectation(n, [&](double s) { return std::pow(s, p + q); });
            } else {
                // sqrt(3) v_z against sqrt(3) w_z averages to v . w over rotations
                kmat(p, q) = pair_expectation(n, [&](double s1, double s2, double d) {
                    return std::pow(s1, p) * std::pow(s2, q) * d;
                });
                gram(p, q) = marginal_expectation(n, [&](double s) { return std::pow(s, p + q + 1); });
            }
        }
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(kmat, gram);
    return es.eigenvalues();
}

} // namespace oracle
