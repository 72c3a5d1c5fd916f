#include "doctest.h"
#include "generators.hpp"

#include <stdexcept>
#include <map>
#include <memory>
#include <sstream>

#include "kac/parallel.hpp"
#include "kac/process.hpp"
#include "kac/spectral.hpp"

using namespace kac;

namespace {
double total_pair_rate(const ParticleState& s, double alpha)
{
    double t = 0.0;
    for (int i = 0; i < s.n(); ++i) {
        for (int j = i + 1; j < s.n(); ++j) {
            t += pair_rate(s, i, j, alpha);
        }
    }
    return t;
}
} // namespace

TEST_CASE("kac_step keeps the state on the manifold")
{
    KernelSpec k;
    for (int c = 0; c < 300; ++c) {
        Rng r = gen::rng(c);
        const int n = gen::particle_count(r, 2, 12);
        k.alpha = 2.0 * uniform01(r);
        const ParticleState x = gen::state_on_manifold(r, n);
        const auto [y, ev] = kac_step(x, k, r);
        CHECK(ev.kind == JumpKind::KacCollision);
        CHECK(ev.a != ev.b);
        CHECK(ev.wait > 0.0);
        CHECK(validate(y, 1e-9 * x.energy).ok);
    }
}

TEST_CASE("kac_step picks pairs in proportion to their rates")
{
    KernelSpec k;
    k.alpha = 1.0;
    ParticleState x;
    x.v = {{1.2, 0, 0}, {-0.2, 0.5, 0}, {-1.0, -0.5, 0}};
    x.energy = (norm2(x.v[0]) + norm2(x.v[1]) + norm2(x.v[2])) / 3.0;
    Rng r = gen::rng(1);
    std::map<std::pair<int, int>, int> count;
    MeanAcc wait;
    const int draws = 60000;
    for (int i = 0; i < draws; ++i) {
        const auto [y, ev] = kac_step(x, k, r);
        ++count[{std::min(ev.a, ev.b), std::max(ev.a, ev.b)}];
        wait.add(ev.wait);
    }
    const double total = total_pair_rate(x, 1.0);
    double chi2 = 0.0;
    for (int i = 0; i < 3; ++i) {
        for (int j = i + 1; j < 3; ++j) {
            const double e = draws * pair_rate(x, i, j, 1.0) / total;
            const double o = count[{i, j}];
            chi2 += (o - e) * (o - e) / e;
        }
    }
    CHECK(chi2 < 13.8); // 2 dof, p = 0.001
    CHECK(std::abs(wait.mean - 1.0 / total) < 4 * wait.std_error());
}

TEST_CASE("incremental rate table stays consistent")
{
    for (double alpha : {0.0, 0.7, 2.0}) {
        KernelSpec k;
        k.alpha = alpha;
        Rng r = gen::rng(static_cast<std::uint64_t>(alpha * 10), 2);
        KacSimulator sim(sample_invariant_recursive(12, r), k);
        CHECK_FALSE(sim.uses_rejection());
        for (int i = 0; i < 20000; ++i) {
            sim.step(r);
        }
        CHECK(sim.total_rate() == doctest::Approx(total_pair_rate(sim.state(), alpha)).epsilon(1e-9));
        CHECK(validate(sim.state(), 1e-9).ok);
        CHECK(sim.events() == 20000);
    }
}

TEST_CASE("thinned simulator has the right event rate")
{
    const int n = 8;
    KernelSpec k;
    k.alpha = 1.0;
    Rng r = gen::rng(3);
    MeanAcc rate;
    for (int i = 0; i < 40000; ++i) {
        rate.add(total_pair_rate(sample_invariant_recursive(n, r), 1.0));
    }
    KacSimulator sim(sample_invariant_recursive(n, r), k, 4);
    CHECK(sim.uses_rejection());
    for (int i = 0; i < 200000; ++i) {
        sim.step(r);
    }
    CHECK(validate(sim.state(), 1e-9).ok);
    const double observed = static_cast<double>(sim.events()) / sim.time();
    CHECK(observed == doctest::Approx(rate.mean).epsilon(0.015));
}

TEST_CASE("conjugate rates and steps")
{
    Rng r = gen::rng(4);
    for (int n : {3, 5, 9}) {
        const ParticleState x = sample_invariant_recursive(n, r);
        double s0 = 0.0, s2 = 0.0;
        for (double v : conjugate_rates(x, 0.0)) {
            CHECK(v == doctest::Approx(1.0 / n));
            s0 += v;
        }
        for (double v : conjugate_rates(x, 2.0)) {
            s2 += v;
        }
        CHECK(s0 == doctest::Approx(1.0));
        CHECK(s2 == doctest::Approx(1.0 - 1.0 / ((n - 1.0) * (n - 1.0))));
        for (int i = 0; i < 50; ++i) {
            const auto [y, ev] = conjugate_step(x, 1.0, r);
            CHECK(ev.kind == JumpKind::ConjugateResample);
            CHECK(norm(y.v[ev.a] - x.v[ev.a]) == 0.0);
            CHECK(validate(y, 1e-10).ok);
        }
    }
    CHECK_THROWS_AS(conjugate_step(sample_invariant_recursive(2, r), 1.0, r), std::invalid_argument);
    CHECK_THROWS_AS(ConjugateSimulator(sample_invariant_recursive(2, r), 1.0), std::invalid_argument);
}

TEST_CASE("simulate honours stop rules and records")
{
    auto basis = std::make_shared<const SingleParticleBasis>(4);
    const std::vector<TrialFunction> obs{single_particle(basis, 0, 1), single_particle(basis, 0, 4)};
    KernelSpec k;
    Rng r = gen::rng(5);
    const ParticleState x = sample_invariant_recursive(4, r);

    StopRule by_events;
    by_events.max_events = 500;
    const Trajectory a = simulate(x, ProcessKind::Kac, k, by_events, obs, r);
    CHECK(a.n_events == 500);
    CHECK(a.events.size() == 500);
    CHECK(a.event_values.size() == 501);
    CHECK(a.event_values[0][0] == doctest::Approx(obs[0](x)));
    CHECK(a.event_values.back()[1] == doctest::Approx(obs[1](a.final_state)));
    CHECK(a.t_end == doctest::Approx(a.events.back().t));

    StopRule by_time;
    by_time.t_max = 20.0;
    RecordOptions rec;
    rec.grid_dt = 0.5;
    rec.events = false;
    const Trajectory b = simulate(x, ProcessKind::Conjugate, k, by_time, obs, r, rec);
    CHECK(b.t_end == 20.0);
    CHECK(b.events.empty());
    CHECK(b.grid_values.size() == 2);
    CHECK(b.grid_values[0].size() == 40);
    CHECK(b.grid_values[0][0] == doctest::Approx(obs[0](x)));

    std::ostringstream csv;
    write_trajectory_csv(a, csv);
    std::istringstream in(csv.str());
    std::string line;
    std::getline(in, line);
    CHECK(line.rfind("t,event_kind,idx_a,idx_b,", 0) == 0);
    int rows = 0;
    std::string first;
    while (std::getline(in, line)) {
        if (rows == 0) {
            first = line;
        }
        ++rows;
    }
    CHECK(rows == 501);
    CHECK(first.find(",init,-1,-1,") != std::string::npos);

    CHECK_THROWS_AS(simulate(x, ProcessKind::Kac, k, StopRule{}, obs, r), std::invalid_argument);
}

TEST_CASE("P_k of a single-particle function")
{
    const int n = 5;
    auto basis = std::make_shared<const SingleParticleBasis>(n);
    const TrialFunction f = single_particle(basis, 0, 4);
    Rng r = gen::rng(6);
    const ParticleState x = sample_invariant_recursive(n, r);
    CHECK(estimate_Pk(f, x, 0, 10, r) == doctest::Approx(f(x)));
    // K eta_4 = -eta_4 / (N-1)
    MeanAcc acc;
    for (int i = 0; i < 40; ++i) {
        acc.add(estimate_Pk(f, x, 2, 2000, r));
    }
    const double expect = -basis->eval_one(4, x.v[2]) / (n - 1.0);
    CHECK(std::abs(acc.mean - expect) < 4 * acc.std_error());
    CHECK_THROWS_AS(estimate_Pk(f, x, 0, 0, r), std::invalid_argument);
}

TEST_CASE("both generators are self-adjoint")
{
    const int n = 4;
    auto basis = std::make_shared<const SingleParticleBasis>(n);
    Rng r = gen::rng(7);
    const TrialFunction f = random_sum_form(basis, r);
    const TrialFunction g = TrialFunction::opaque(
        n, [](std::span<const Vec3> v) { return v[0].x * v[1].y + norm2(v[2]) * v[3].z; }, "mixed", true);
    KernelSpec k;
    k.alpha = 1.0;
    for (ProcessKind p : {ProcessKind::Kac, ProcessKind::Conjugate}) {
        const PairingCheck c = generator_pairing(p, f, g, k, 40000, Seed{8});
        CHECK(std::abs(c.difference.value) <= 3.5 * c.difference.std_error + 1e-12);
        CHECK(c.g_Lf.value == doctest::Approx(c.f_Lg.value).epsilon(0.1));
    }
}
