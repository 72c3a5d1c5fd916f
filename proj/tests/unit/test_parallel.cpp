#include "doctest.h"
#include "generators.hpp"

#include <stdexcept>
#include <memory>

#include "kac/chaos.hpp"
#include "kac/parallel.hpp"
#include "kac/spectral.hpp"

using namespace kac;

TEST_CASE("batch shares cover the total")
{
    for (std::int64_t total : {0LL, 1LL, 63LL, 64LL, 1000001LL}) {
        std::int64_t sum = 0;
        for (int b = 0; b < kBatches; ++b) {
            sum += batch_share(total, kBatches, b);
        }
        CHECK(sum == total);
    }
}

TEST_CASE("MeanAcc merge matches a single pass")
{
    Rng r = gen::rng(1);
    std::normal_distribution<double> g(3.0, 2.0);
    MeanAcc all;
    std::vector<MeanAcc> parts(7);
    for (int i = 0; i < 10000; ++i) {
        const double x = g(r);
        all.add(x);
        parts[static_cast<std::size_t>(i % 7)].add(x);
    }
    const MeanAcc merged = merge_ordered(parts);
    CHECK(merged.n == all.n);
    CHECK(merged.mean == doctest::Approx(all.mean).epsilon(1e-12));
    CHECK(merged.variance() == doctest::Approx(all.variance()).epsilon(1e-10));
}

TEST_CASE("streams are reproducible and distinct")
{
    Rng a = make_stream(7, 1, 2);
    Rng b = make_stream(7, 1, 2);
    Rng c = make_stream(7, 1, 3);
    Rng d = make_stream(7, 2, 2);
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(x != d());
    CHECK(child_seed(Seed{1}, 5).value != child_seed(Seed{1}, 6).value);
}

TEST_CASE("z_score")
{
    CHECK(z_score(1.0, 0.3, 1.0, 0.4) == 0.0);
    CHECK(z_score(1.0, 0.3, 2.0, 0.4) == doctest::Approx(2.0));
    CHECK(z_score(1.0, 0.0, 1.0, 0.0) == 0.0);
}

TEST_CASE("serial and parallel estimators agree bit for bit")
{
    const int orders[2] = {4, 6};
    const auto mp = marginal_moments(5, orders, 20000, Seed{3}, Exec::Parallel);
    const auto ms = marginal_moments(5, orders, 20000, Seed{3}, Exec::Serial);
    for (std::size_t i = 0; i < mp.size(); ++i) {
        CHECK(mp[i].estimate == ms[i].estimate);
        CHECK(mp[i].std_error == ms[i].std_error);
    }

    auto basis = std::make_shared<const SingleParticleBasis>(4);
    const auto family = default_trial_family(basis);
    KernelSpec k;
    k.alpha = 1.0;
    const GapReport gp = variational_gap(ProcessKind::Kac, k, family, 5000, Seed{4}, 8, Exec::Parallel);
    const GapReport gs = variational_gap(ProcessKind::Kac, k, family, 5000, Seed{4}, 8, Exec::Serial);
    CHECK(gp.estimate == gs.estimate);
    CHECK(gp.std_error == gs.std_error);
    const GapReport cp = variational_gap(ProcessKind::Conjugate, k, family, 3000, Seed{5}, 8, Exec::Parallel);
    const GapReport cs = variational_gap(ProcessKind::Conjugate, k, family, 3000, Seed{5}, 8, Exec::Serial);
    CHECK(cp.estimate == cs.estimate);

    const SingleParticleBasis b3(3);
    const KSpectrum kp = K_spectrum(3, b3, 5000, Seed{6}, Exec::Parallel);
    const KSpectrum ks = K_spectrum(3, b3, 5000, Seed{6}, Exec::Serial);
    CHECK((kp.matrix - ks.matrix).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("worker count is positive")
{
    configure_threads();
    CHECK(worker_threads() >= 1);
}
