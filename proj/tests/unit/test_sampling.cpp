#include "doctest.h"
#include "generators.hpp"
#include "oracle/quadrature.hpp"

#include <algorithm>
#include <stdexcept>

#include "kac/parallel.hpp"
#include "kac/sampling.hpp"

using namespace kac;

TEST_CASE("both samplers land on S_{N,1,0}")
{
    for (int c = 0; c < 300; ++c) {
        Rng r = gen::rng(c);
        const int n = gen::particle_count(r, 2, 64);
        CHECK(validate(sample_invariant_recursive(n, r), 1e-10).ok);
        CHECK(validate(sample_invariant_gauss(n, r), 1e-10).ok);
    }
    Rng r = gen::rng(0);
    CHECK_THROWS_AS(sample_invariant_recursive(1, r), std::invalid_argument);
    CHECK_THROWS_AS(sample_invariant_gauss(1, r), std::invalid_argument);
}

TEST_CASE("N=2 states are antipodal on the unit sphere")
{
    Rng r = gen::rng(1);
    for (int i = 0; i < 100; ++i) {
        const ParticleState x = sample_invariant_recursive(2, r);
        CHECK(norm(x.v[0] + x.v[1]) < 1e-14);
        CHECK(norm2(x.v[0]) == doctest::Approx(1.0));
    }
}

TEST_CASE("lift preserves the constraints and places the ball point")
{
    for (int c = 0; c < 200; ++c) {
        Rng r = gen::rng(c, 2);
        const int n = gen::particle_count(r, 3, 20);
        const ParticleState inner = sample_invariant_recursive(n - 1, r);
        const BallPoint b = sample_nu(n, r);
        REQUIRE(norm2(b.v) <= 1.0);
        const int k = std::uniform_int_distribution<int>(0, n - 1)(r);
        const ParticleState x = lift_Tk(inner, b, k);
        CHECK(x.n() == n);
        CHECK(validate(x, 1e-10).ok);
        CHECK(norm(x.v[k] - b.v * std::sqrt(n - 1.0)) < 1e-12);
    }
    Rng r = gen::rng(3);
    const ParticleState inner = sample_invariant_recursive(3, r);
    CHECK_THROWS_AS(lift_Tk(inner, BallPoint{{2, 0, 0}}, 0), std::domain_error);
    CHECK_THROWS_AS(lift_Tk(inner, BallPoint{{0, 0, 0}}, 4), std::out_of_range);
}

TEST_CASE("radial law of nu_N integrates to one")
{
    for (int n : {3, 4, 9}) {
        RadialLawNu law{n};
        const oracle::Rule q = oracle::gauss_legendre(200);
        double acc = 0.0;
        for (std::size_t i = 0; i < q.x.size(); ++i) {
            const double rr = 0.5 * (1 + q.x[i]);
            acc += q.w[i] * law.radial_density(rr);
        }
        CHECK(acc == doctest::Approx(1.0).epsilon(1e-6));
    }
}

TEST_CASE("exact marginal moments agree with the Beta quadrature oracle")
{
    for (int n : {2, 3, 4, 7, 32}) {
        for (int k = 0; k <= 5; ++k) {
            const double q = oracle::marginal_expectation(n, [&](double s) { return std::pow(s, k); });
            CHECK(exact_marginal_moment(n, k) == doctest::Approx(q).epsilon(1e-10));
        }
    }
    CHECK(exact_marginal_moment(3, 2) == doctest::Approx(1.25));
    CHECK(exact_marginal_moment(3, 3) == doctest::Approx(1.75));
    CHECK(gaussian_moment(1) == doctest::Approx(1.0));
    CHECK(gaussian_moment(2) == doctest::Approx(5.0 / 3.0));
    CHECK(gaussian_moment(3) == doctest::Approx(35.0 / 9.0));
}

TEST_CASE("sampled marginal moments match the exact law")
{
    for (int n : {3, 5}) {
        Rng r = gen::rng(n, 4);
        MeanAcc m2, m4;
        for (int i = 0; i < 200000; ++i) {
            const ParticleState x = sample_invariant_recursive(n, r);
            const double s = norm2(x.v[static_cast<std::size_t>(i % n)]);
            m2.add(s);
            m4.add(s * s);
        }
        CHECK(std::abs(m2.mean - 1.0) < 4 * m2.std_error());
        CHECK(std::abs(m4.mean - exact_marginal_moment(n, 2)) < 4 * m4.std_error());
    }
}

TEST_CASE("conditional samplers pin the right coordinates")
{
    for (int c = 0; c < 200; ++c) {
        Rng r = gen::rng(c, 5);
        const int n = gen::particle_count(r, 3, 16);
        const ParticleState base = sample_invariant_recursive(n, r);
        const int k = std::uniform_int_distribution<int>(0, n - 1)(r);
        const ParticleState x = sample_conditional_slice(base.v[k], k, n, r);
        CHECK(validate(x, 1e-10).ok);
        CHECK(norm(x.v[k] - base.v[k]) == 0.0);
        if (n >= 4) {
            const int idx[2] = {0, n - 1};
            const Vec3 vals[2] = {base.v[0], base.v[n - 1]};
            const ParticleState y = sample_conditional_fixed(idx, vals, n, r);
            CHECK(validate(y, 1e-10).ok);
            CHECK(norm(y.v[0] - base.v[0]) == 0.0);
            CHECK(norm(y.v[n - 1] - base.v[n - 1]) == 0.0);
        }
    }
    Rng r = gen::rng(6);
    CHECK_THROWS_AS(sample_conditional_slice(Vec3{3, 0, 0}, 0, 3, r), std::domain_error);
    CHECK_THROWS_AS(sample_conditional_slice(Vec3{0, 0, 0}, 0, 2, r), std::invalid_argument);
    const int idx[2] = {1, 1};
    const Vec3 vals[2] = {{0, 0, 0}, {0, 0, 0}};
    CHECK_THROWS_AS(sample_conditional_fixed(idx, vals, 5, r), std::out_of_range);
}

TEST_CASE("conditional slice reproduces E{v_1 | v_2 = v} = -v/(N-1)")
{
    const int n = 5;
    Rng r = gen::rng(7);
    const Vec3 v{1.2, 0.0, 0.0};
    MeanAcc x;
    for (int i = 0; i < 100000; ++i) {
        x.add(sample_conditional_slice(v, 1, n, r).v[0].x);
    }
    CHECK(std::abs(x.mean + 1.2 / (n - 1)) < 4 * x.std_error());
}

TEST_CASE("shuffle keeps the multiset of velocities")
{
    Rng r = gen::rng(8);
    ParticleState x = sample_invariant_recursive(9, r);
    std::vector<double> before;
    for (const auto& v : x.v) {
        before.push_back(v.x);
    }
    shuffle_particles(x, r);
    std::vector<double> after;
    for (const auto& v : x.v) {
        after.push_back(v.x);
    }
    std::sort(before.begin(), before.end());
    std::sort(after.begin(), after.end());
    CHECK(before == after);
}
