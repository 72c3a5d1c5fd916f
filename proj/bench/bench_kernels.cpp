// Parallel batch kernels against their serial reference path.
// Thread count follows KAC_GAP_THREADS.

#include <benchmark/benchmark.h>

#include <memory>

#include "kac/chaos.hpp"
#include "kac/parallel.hpp"
#include "kac/spectral.hpp"

using namespace kac;

namespace {

Exec exec_of(const benchmark::State& state) { return state.range(0) == 0 ? Exec::Serial : Exec::Parallel; }

void label(benchmark::State& state) { state.SetLabel(state.range(0) == 0 ? "serial" : "parallel"); }

void BM_KacForm(benchmark::State& state)
{
    const int n = static_cast<int>(state.range(1));
    auto basis = std::make_shared<const SingleParticleBasis>(n);
    const FamilyEvaluator fam(default_trial_family(basis));
    KernelSpec k;
    k.alpha = 1.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(assemble_kac(fam, k, 20000, Seed{1}, {}, exec_of(state)));
    }
    label(state);
    state.SetItemsProcessed(state.iterations() * 20000);
}

void BM_ConjugateForm(benchmark::State& state)
{
    const int n = static_cast<int>(state.range(1));
    auto basis = std::make_shared<const SingleParticleBasis>(n);
    const FamilyEvaluator fam(default_trial_family(basis));
    for (auto _ : state) {
        benchmark::DoNotOptimize(assemble_conjugate(fam, 1.0, 5000, Seed{2}, exec_of(state)));
    }
    label(state);
    state.SetItemsProcessed(state.iterations() * 5000);
}

void BM_KSpectrum(benchmark::State& state)
{
    const int n = static_cast<int>(state.range(1));
    const SingleParticleBasis basis(n);
    for (auto _ : state) {
        benchmark::DoNotOptimize(K_spectrum(n, basis, 50000, Seed{3}, exec_of(state)));
    }
    label(state);
    state.SetItemsProcessed(state.iterations() * 50000);
}

void BM_MarginalMoments(benchmark::State& state)
{
    const int n = static_cast<int>(state.range(1));
    const int orders[3] = {2, 4, 6};
    for (auto _ : state) {
        benchmark::DoNotOptimize(marginal_moments(n, orders, 200000, Seed{4}, exec_of(state)));
    }
    label(state);
    state.SetItemsProcessed(state.iterations() * 200000);
}

} // namespace

BENCHMARK(BM_KacForm)->ArgsProduct({{0, 1}, {4, 16}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ConjugateForm)->ArgsProduct({{0, 1}, {4, 16}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_KSpectrum)->ArgsProduct({{0, 1}, {3, 8}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MarginalMoments)->ArgsProduct({{0, 1}, {8, 64}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
