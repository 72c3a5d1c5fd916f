#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "kac/rng.hpp"

namespace kac {

/// Monte Carlo work is split into this many batches regardless of the thread
/// count. Batch b draws from make_stream(seed, tag, b), and partial results are
/// merged in batch order, so serial and parallel runs agree bit for bit.
inline constexpr int kBatches = 64;

enum class Exec { Parallel, Serial };

/// Worker count: KAC_GAP_THREADS if set and positive, else the OpenMP default.
int worker_threads();

/// Applies KAC_GAP_THREADS to the OpenMP runtime. Idempotent.
void configure_threads();

/// Number of samples batch `b` of `batches` handles when `total` are split.
inline std::int64_t batch_share(std::int64_t total, int batches, int b)
{
    return total / batches + (b < total % batches ? 1 : 0);
}

/// Runs fn(b) for b in [0, batches) and returns the per-batch results in order.
template <class Partial, class Fn>
std::vector<Partial> run_batches(int batches, Exec exec, Fn&& fn)
{
    std::vector<Partial> out(static_cast<std::size_t>(batches));
    if (exec == Exec::Serial) {
        for (int b = 0; b < batches; ++b) {
            out[static_cast<std::size_t>(b)] = fn(b);
        }
        return out;
    }
    configure_threads();
#pragma omp parallel for schedule(dynamic, 1)
    for (int b = 0; b < batches; ++b) {
        out[static_cast<std::size_t>(b)] = fn(b);
    }
    return out;
}

/// Streaming mean and variance (Welford), mergeable in a fixed order.
struct MeanAcc {
    double mean = 0.0;
    double m2 = 0.0;
    std::int64_t n = 0;

    void add(double x)
    {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }

    void merge(const MeanAcc& o)
    {
        if (o.n == 0) {
            return;
        }
        if (n == 0) {
            *this = o;
            return;
        }
        const double nt = static_cast<double>(n + o.n);
        const double d = o.mean - mean;
        mean += d * static_cast<double>(o.n) / nt;
        m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / nt;
        n += o.n;
    }

    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double std_error() const { return n > 1 ? std::sqrt(variance() / static_cast<double>(n)) : 0.0; }
};

/// Point estimate with one-sigma standard error.
struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    std::int64_t n = 0;
};

inline Estimate to_estimate(const MeanAcc& acc) { return {acc.mean, acc.std_error(), acc.n}; }

template <class T>
T merge_ordered(const std::vector<T>& parts)
{
    T total{};
    for (const auto& p : parts) {
        total.merge(p);
    }
    return total;
}

/// |a - b| / sqrt(sa^2 + sb^2); zero when both errors vanish and a == b.
double z_score(double a, double sa, double b, double sb);

} // namespace kac
