#include "doctest.h"

#include <stdexcept>
#include <cmath>

#include "kac/chaos.hpp"
#include "kac/sampling.hpp"

using namespace kac;

TEST_CASE("marginal moments approach their exact and Gaussian values")
{
    const int orders[3] = {2, 4, 6};
    for (int n : {3, 40}) {
        const auto m = marginal_moments(n, orders, 100000, Seed{1});
        REQUIRE(m.size() == 3);
        for (const auto& r : m) {
            CHECK(std::abs(r.estimate - r.reference) < 4 * r.std_error + 1e-12);
        }
        CHECK(m[0].reference == doctest::Approx(1.0));
        if (n == 40) {
            CHECK(m[1].reference == doctest::Approx(m[1].gaussian_reference).epsilon(0.05));
        }
    }
}

TEST_CASE("conditional fourth moments agree with the slice closed form")
{
    for (int n : {6, 12}) {
        for (const Vec3& v : conditional_grid(n)) {
            const CondMoment c = cond_moment4_one(n, v, 40000, Seed{2});
            CHECK(std::abs(c.mc.value - c.exact) < 4 * c.mc.std_error);
        }
        const CondMoment two = cond_moment4_two(n, Vec3{0.5, 0, 0}, Vec3{0, 1.0, 0}, 40000, Seed{3});
        CHECK(std::abs(two.mc.value - two.exact) < 4 * two.mc.std_error);
    }
    CHECK_THROWS_AS(cond_moment4_one(2, Vec3{}, 10, Seed{1}), std::invalid_argument);
    CHECK_THROWS_AS(cond_moment4_one(4, Vec3{2, 0, 0}, 10, Seed{1}), std::domain_error);
    CHECK_THROWS_AS(cond_moment4_two(3, Vec3{}, Vec3{}, 10, Seed{1}), std::invalid_argument);
    // v = w is only reachable for |v|^2 <= (N-2)/2
    CHECK_THROWS_AS(cond_moment4_two(6, Vec3{1.5, 0, 0}, Vec3{1.5, 0, 0}, 10, Seed{1}), std::domain_error);
    CHECK_NOTHROW(cond_moment4_two(6, Vec3{1.4, 0, 0}, Vec3{1.4, 0, 0}, 10, Seed{1}));
}

TEST_CASE("eighth conditional moment at v = 0 tends to the Gaussian value")
{
    const Estimate e = cond_moment8_one(60, Vec3{}, 100000, Seed{4});
    CHECK(e.value == doctest::Approx(gaussian_moment(4)).epsilon(0.1));
}

TEST_CASE("rate-weight deviations")
{
    for (int n : {4, 10}) {
        const Estimate w = wdev_lp(n, 2.0, 2.0, 100000, Seed{5});
        CHECK(std::abs(w.value - std::sqrt(wdev_alpha2_p2_exact(n))) < 4 * w.std_error);
    }
    CHECK(wdev_lp(5, 0.0, 2.0, 1000, Seed{6}).value == 0.0);
    CHECK(wdev_alpha2_p2_exact(10) < wdev_alpha2_p2_exact(5));
}

TEST_CASE("joint chaos")
{
    const JointChaosReport r = joint_chaos_test(8, 3, 100000, Seed{7});
    CHECK(r.pass);
    CHECK(r.v1v2_reference == doctest::Approx(-1.0 / 7.0));
    CHECK(std::abs(r.energy_cov.value - r.energy_cov_reference) < 4 * r.energy_cov.std_error);
}

TEST_CASE("C/N fit")
{
    const std::vector<int> ns{8, 16, 32};
    const CFit good = fit_c_over_n(ns, std::vector<double>{1.0 / 8, 1.1 / 16, 0.9 / 32});
    CHECK(good.stable);
    CHECK(good.c == doctest::Approx(1.0));
    const CFit bad = fit_c_over_n(ns, std::vector<double>{0.5, 0.5, 0.5});
    CHECK_FALSE(bad.stable);
    CHECK_THROWS_AS(fit_c_over_n(ns, std::vector<double>{1.0}), std::invalid_argument);
}
