#include "doctest.h"
#include "generators.hpp"

#include <stdexcept>

#include "kac/core.hpp"
#include "kac/kernel.hpp"

using namespace kac;

TEST_CASE("collision preserves pair momentum, energy and relative speed")
{
    for (int c = 0; c < 2000; ++c) {
        Rng r = gen::rng(c);
        const Vec3 a = gen::wild_velocity(r);
        const Vec3 b = gen::wild_velocity(r);
        const auto [a2, b2] = post_collision_pair(a, b, sample_unit_sphere(r));
        const double e = norm2(a) + norm2(b);
        CHECK(norm((a2 + b2) - (a + b)) <= 1e-14 * std::sqrt(e) + 1e-300);
        CHECK(std::abs(norm2(a2) + norm2(b2) - e) <= 1e-13 * e);
        CHECK(std::abs(norm(a2 - b2) - norm(a - b)) <= 1e-13 * std::sqrt(e));
    }
}

TEST_CASE("post-collision relative velocity points along sigma")
{
    Rng r = gen::rng(1);
    const Vec3 a{1.0, 2.0, -0.5};
    const Vec3 b{-0.3, 0.1, 0.7};
    const Vec3 s = sample_unit_sphere(r);
    const auto [a2, b2] = post_collision_pair(a, b, s);
    const Vec3 d = (a2 - b2) * (1.0 / norm(a - b));
    CHECK(norm(d - s) < 1e-14);
}

TEST_CASE("equal velocities do not move")
{
    const Vec3 v{0.3, -0.2, 0.1};
    const auto [a, b] = post_collision_pair(v, v, Vec3{0, 0, 1});
    CHECK(norm(a - v) == 0.0);
    CHECK(norm(b - v) == 0.0);
}

TEST_CASE("apply_collision validates indices")
{
    Rng r = gen::rng(2);
    ParticleState s = sample_invariant_recursive(4, r);
    CHECK_THROWS_AS(apply_collision_inplace(s, 0, 0, Vec3{0, 0, 1}), std::out_of_range);
    CHECK_THROWS_AS(apply_collision_inplace(s, 0, 4, Vec3{0, 0, 1}), std::out_of_range);
    CHECK_THROWS_AS(apply_collision_inplace(s, -1, 2, Vec3{0, 0, 1}), std::out_of_range);
    CollisionEvent ev{1, 3, Vec3{1, 0, 0}, 0.0};
    const ParticleState t = apply_collision(s, ev);
    CHECK(validate(t).ok);
}

TEST_CASE("pair rate")
{
    CHECK(pair_rate_prefactor(3) == doctest::Approx(1.0));
    CHECK(pair_rate_prefactor(5) == doctest::Approx(0.5));
    ParticleState s;
    s.v = {{1, 0, 0}, {-1, 0, 0}};
    CHECK(pair_rate(s, 0, 1, 0.0) == doctest::Approx(2.0));
    CHECK(pair_rate(s, 0, 1, 1.0) == doctest::Approx(4.0));
    CHECK(pair_rate(s, 0, 1, 2.0) == doctest::Approx(8.0));
    CHECK(pow_alpha(0.0, 0.0) == 1.0);
    CHECK(pow_alpha(0.0, 1.5) == 0.0);
    CHECK(pow_alpha(3.0, 0.5) == doctest::Approx(std::sqrt(3.0)));
}

TEST_CASE("normalize_to_unit and from_unit are inverse")
{
    for (int c = 0; c < 200; ++c) {
        Rng r = gen::rng(c, 3);
        const int n = gen::particle_count(r);
        const ParticleState x = gen::state_on_manifold(r, n);
        const ParticleState u = normalize_to_unit(x);
        CHECK(validate(u).ok);
        const Diagnostics dx = validate(x, 1e-9 * x.energy);
        CHECK(dx.ok);
        const ParticleState back = from_unit(u, x.energy, x.momentum);
        for (int i = 0; i < n; ++i) {
            CHECK(norm(back.v[i] - x.v[i]) < 1e-11 * std::sqrt(x.energy));
        }
    }
    ParticleState bad;
    bad.v = {{1, 0, 0}, {1, 0, 0}};
    bad.energy = 1.0;
    bad.momentum = {1, 0, 0};
    CHECK_THROWS_AS(normalize_to_unit(bad), std::domain_error);
    Rng r1 = gen::rng(99);
    CHECK_THROWS_AS(from_unit(sample_invariant_recursive(3, r1), 1.0, Vec3{2, 0, 0}), std::domain_error);
}

TEST_CASE("rate weight")
{
    CHECK(weight_w(Vec3{0, 0, 0}, 3) == doctest::Approx(9.0 / 4.0 - 3.0 / 4.0));
    CHECK(weight_w(Vec3{std::sqrt(2.0), 0, 0}, 3) == doctest::Approx(0.0));
    CHECK(weight_w(Vec3{std::sqrt(2.0) * (1 + 1e-14), 0, 0}, 3) >= 0.0);
    CHECK_THROWS_AS(weight_w(Vec3{1.5, 0, 0}, 3), std::domain_error);
    CHECK(weight_w_pow(Vec3{0.2, 0, 0}, 4, 0.0) == 1.0);
}

TEST_CASE("W identities hold on every sampled state")
{
    for (int c = 0; c < 300; ++c) {
        Rng r = gen::rng(c, 4);
        const int n = gen::particle_count(r, 3, 30);
        const ParticleState x = sample_invariant_recursive(n, r);
        CHECK(weight_W(x, 0.0) == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(weight_W(x, 2.0) == doctest::Approx(1.0 - 1.0 / ((n - 1.0) * (n - 1.0))).epsilon(1e-12));
        for (double alpha : {0.5, 1.0, 1.5}) {
            const double w = weight_W(x, alpha);
            CHECK(w >= weight_W_lower_bound(n, alpha) - 1e-12);
            CHECK(w <= weight_W_upper_bound(n, alpha) + 1e-12);
        }
    }
}

TEST_CASE("W lower bound closed values")
{
    CHECK(weight_W_lower_bound(3, 1.0) == doctest::Approx(21.0 / 32.0));
    CHECK(weight_W_lower_bound(4, 1.0) == doctest::Approx(64.0 / 81.0));
    CHECK(weight_W_upper_bound(3, 2.0) == doctest::Approx(0.75));
}

TEST_CASE("reproject removes drift")
{
    Rng r = gen::rng(5);
    ParticleState x = gen::state_on_manifold(r, 10);
    for (auto& v : x.v) {
        v = v * (1.0 + 1e-7) + Vec3{1e-8, -2e-8, 0};
    }
    CHECK_FALSE(validate(x, 1e-12).ok);
    reproject(x);
    CHECK(validate(x, 1e-12 * x.energy).ok);
}
