// K spectrum checked against the independent quadrature oracle.
#include "doctest.h"
#include "oracle/quadrature.hpp"

#include <stdexcept>
#include <algorithm>
#include <vector>

#include "kac/spectral.hpp"

using namespace kac;

namespace {
std::vector<double> sector(const KSpectrum& ks, int l, bool one_per_m)
{
    std::vector<double> out;
    for (Eigen::Index i = 0; i < ks.eigenvalues.size(); ++i) {
        if (ks.sector[static_cast<std::size_t>(i)] == l) {
            out.push_back(ks.eigenvalues[i]);
        }
    }
    std::sort(out.begin(), out.end());
    if (one_per_m) {
        std::vector<double> thin;
        for (std::size_t i = 0; i < out.size(); i += static_cast<std::size_t>(2 * l + 1)) {
            thin.push_back(out[i]);
        }
        return thin;
    }
    return out;
}
} // namespace

TEST_CASE("Gauss-Jacobi rules integrate Beta moments exactly")
{
    const oracle::Rule r = oracle::beta_rule(10, 1.5, 4.5);
    double m1 = 0.0, m3 = 0.0, w = 0.0;
    for (std::size_t i = 0; i < r.x.size(); ++i) {
        w += r.w[i];
        m1 += r.w[i] * r.x[i];
        m3 += r.w[i] * r.x[i] * r.x[i] * r.x[i];
    }
    CHECK(w == doctest::Approx(1.0));
    CHECK(m1 == doctest::Approx(1.5 / 6.0));
    CHECK(m3 == doctest::Approx(1.5 * 2.5 * 3.5 / (6.0 * 7.0 * 8.0)));
}

TEST_CASE("oracle reproduces the N=3 sector spectra")
{
    const auto l0 = oracle::k_sector_eigenvalues(3, 0, 4);
    const std::vector<double> e0{-0.5, -0.2, 0.0, 0.25, 1.0};
    for (int i = 0; i < 5; ++i) {
        CHECK(l0[i] == doctest::Approx(e0[static_cast<std::size_t>(i)]).epsilon(1e-8).scale(1.0));
    }
    const auto l1 = oracle::k_sector_eigenvalues(3, 1, 4);
    const std::vector<double> e1{-0.5, -0.25, -0.05, 0.2, 0.5};
    for (int i = 0; i < 5; ++i) {
        CHECK(l1[i] == doctest::Approx(e1[static_cast<std::size_t>(i)]).epsilon(1e-8).scale(1.0));
    }
}

TEST_CASE("Monte Carlo K spectrum agrees with the oracle for N = 3, 4, 7")
{
    for (int n : {3, 4, 7}) {
        const SingleParticleBasis b(n);
        const KSpectrum ks = K_spectrum(n, b, 300000, Seed{static_cast<std::uint64_t>(n)});
        for (int l : {0, 1}) {
            const auto mc = sector(ks, l, true);
            const auto q = oracle::k_sector_eigenvalues(n, l, 4);
            REQUIRE(mc.size() == static_cast<std::size_t>(q.size()));
            for (std::size_t i = 0; i < mc.size(); ++i) {
                CHECK(mc[i] == doctest::Approx(q[static_cast<Eigen::Index>(i)]).epsilon(0.01).scale(1.0));
            }
        }
        const KClosedForm cf = closed_form_k_eigenvalues(n);
        const auto q1 = oracle::k_sector_eigenvalues(n, 1, 4);
        CHECK(q1.maxCoeff() == doctest::Approx(cf.top).epsilon(1e-8));
        CHECK(q1.minCoeff() == doctest::Approx(cf.conserved).epsilon(1e-8));
    }
}
