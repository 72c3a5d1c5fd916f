#include "doctest.h"
#include "generators.hpp"

#include <stdexcept>
#include <memory>

#include "kac/autocorr.hpp"
#include "kac/process.hpp"

using namespace kac;

namespace {
/// Stationary Ornstein-Uhlenbeck path sampled at spacing dt: rho(t) = exp(-rate t).
std::vector<double> ou_series(double rate, double dt, std::size_t len, Rng& r)
{
    std::normal_distribution<double> g;
    const double a = std::exp(-rate * dt);
    const double s = std::sqrt(1.0 - a * a);
    std::vector<double> x(len);
    x[0] = g(r);
    for (std::size_t i = 1; i < len; ++i) {
        x[i] = a * x[i - 1] + s * g(r);
    }
    return x;
}
} // namespace

TEST_CASE("autocorrelation of a known series")
{
    Rng r = gen::rng(1);
    const auto x = ou_series(1.0, 0.1, 400000, r);
    const auto rho = autocorrelation(x, 20);
    CHECK(rho[0] == doctest::Approx(1.0));
    CHECK(rho[10] == doctest::Approx(std::exp(-1.0)).epsilon(0.03));
    const auto blocked = autocorrelation(x, 20, 16);
    CHECK(blocked[10] == doctest::Approx(rho[10]).epsilon(0.01));
}

TEST_CASE("relaxation rate recovered from an exponential series")
{
    for (double rate : {0.5, 2.0}) {
        Rng r = gen::rng(static_cast<std::uint64_t>(rate * 10), 2);
        const double dt = 0.1 / rate;
        const auto x = ou_series(rate, dt, 500000, r);
        const GapReport g = autocorr_gap_series(x, dt);
        CHECK_FALSE(g.flagged);
        CHECK(g.method == "autocorr");
        CHECK(g.estimate == doctest::Approx(rate).epsilon(0.03));
        CHECK(g.std_error > 0.0);
        CHECK(std::abs(g.estimate - rate) < 5 * g.std_error + 0.01 * rate);
    }
}

TEST_CASE("degenerate series are flagged")
{
    const std::vector<double> flat(1000, 2.5);
    CHECK(autocorr_gap_series(flat, 0.1).flagged);
    Rng r = gen::rng(3);
    std::normal_distribution<double> g;
    std::vector<double> white(20000);
    for (auto& w : white) {
        w = g(r);
    }
    const GapReport wr = autocorr_gap_series(white, 0.1);
    CHECK(wr.flagged);
    CHECK_FALSE(wr.note.empty());
}

TEST_CASE("autocorr_gap reads a trajectory grid")
{
    auto basis = std::make_shared<const SingleParticleBasis>(2);
    KernelSpec k;
    k.alpha = 0.0;
    Rng r = gen::rng(4);
    StopRule stop;
    stop.max_events = 100000;
    RecordOptions rec;
    rec.events = false;
    rec.event_observables = false;
    rec.grid_dt = 0.05;
    const Trajectory t = simulate(sample_invariant_recursive(2, r), ProcessKind::Kac, k, stop,
                                  {single_particle(basis, 0, 3)}, r, rec);
    const GapReport g = autocorr_gap(t, 0);
    CHECK(g.estimate == doctest::Approx(2.0).epsilon(0.05));
}
