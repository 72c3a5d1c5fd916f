#include "kac/autocorr.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace kac {

namespace {

struct BlockSums {
    std::vector<std::vector<double>> c; // c[b][l]
    std::vector<std::vector<double>> n;
};

BlockSums block_sums(std::span<const double> x, int max_lag, int blocks)
{
    const std::size_t len = x.size();
    const std::size_t bl = len / static_cast<std::size_t>(blocks);
    BlockSums s;
    s.c.assign(static_cast<std::size_t>(blocks), std::vector<double>(static_cast<std::size_t>(max_lag + 1), 0.0));
    s.n = s.c;
    for (int b = 0; b < blocks; ++b) {
        const std::size_t lo = static_cast<std::size_t>(b) * bl;
        const std::size_t hi = b + 1 == blocks ? len : lo + bl;
        for (int l = 0; l <= max_lag; ++l) {
            double acc = 0.0;
            const std::size_t ll = static_cast<std::size_t>(l);
            if (hi < lo + ll + 1) {
                continue;
            }
            for (std::size_t t = lo; t + ll < hi; ++t) {
                acc += x[t] * x[t + ll];
            }
            s.c[b][l] = acc;
            s.n[b][l] = static_cast<double>(hi - lo - ll);
        }
    }
    return s;
}

std::vector<double> rho_from(const BlockSums& s, int skip)
{
    const std::size_t lags = s.c.front().size();
    std::vector<double> cov(lags, 0.0), cnt(lags, 0.0);
    for (std::size_t b = 0; b < s.c.size(); ++b) {
        if (static_cast<int>(b) == skip) {
            continue;
        }
        for (std::size_t l = 0; l < lags; ++l) {
            cov[l] += s.c[b][l];
            cnt[l] += s.n[b][l];
        }
    }
    std::vector<double> rho(lags, 0.0);
    const double c0 = cov[0] / cnt[0];
    for (std::size_t l = 0; l < lags; ++l) {
        rho[l] = cnt[l] > 0.0 && c0 > 0.0 ? (cov[l] / cnt[l]) / c0 : 0.0;
    }
    return rho;
}

struct Fit {
    double rate = 0.0;
    int points = 0;
    bool decayed = false;
};

Fit fit_window(const std::vector<double>& rho, double dt, double hi, double lo)
{
    Fit f;
    std::vector<double> ts, ys;
    for (std::size_t l = 1; l < rho.size(); ++l) {
        if (rho[l] < lo) {
            f.decayed = true;
            break;
        }
        if (rho[l] <= hi) {
            ts.push_back(static_cast<double>(l) * dt);
            ys.push_back(std::log(rho[l]));
        }
    }
    f.points = static_cast<int>(ts.size());
    if (f.points < 2) {
        return f;
    }
    const double mt = std::accumulate(ts.begin(), ts.end(), 0.0) / f.points;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / f.points;
    double sxy = 0.0, sxx = 0.0;
    for (int i = 0; i < f.points; ++i) {
        sxy += (ts[i] - mt) * (ys[i] - my);
        sxx += (ts[i] - mt) * (ts[i] - mt);
    }
    f.rate = -sxy / sxx;
    return f;
}

} // namespace

std::vector<double> autocorrelation(std::span<const double> x, int max_lag, int blocks)
{
    if (x.size() < 2 || max_lag < 0 || blocks < 1) {
        throw std::invalid_argument("autocorrelation: series too short or bad arguments");
    }
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    std::vector<double> c(x.begin(), x.end());
    for (double& v : c) {
        v -= mean;
    }
    return rho_from(block_sums(c, max_lag, blocks), -1);
}

GapReport autocorr_gap_series(std::span<const double> series, double dt, AutocorrOptions opts)
{
    if (!(dt > 0.0)) {
        throw std::invalid_argument("autocorr_gap: grid spacing must be positive");
    }
    if (opts.blocks < 2 || series.size() < static_cast<std::size_t>(8 * opts.blocks)) {
        throw std::invalid_argument("autocorr_gap: series too short for the jackknife");
    }
    GapReport r;
    r.method = "autocorr";
    r.n_samples = static_cast<std::int64_t>(series.size());
    const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(series.size());
    std::vector<double> c(series.begin(), series.end());
    double var = 0.0;
    for (double& v : c) {
        v -= mean;
        var += v * v;
    }
    if (!(var > 0.0)) {
        r.flagged = true;
        r.note = "observable has zero variance";
        return r;
    }
    const int cap = static_cast<int>(series.size() / static_cast<std::size_t>(4 * opts.blocks));
    int max_lag = std::min(64, cap);
    BlockSums sums;
    std::vector<double> rho;
    for (;;) {
        sums = block_sums(c, max_lag, opts.blocks);
        rho = rho_from(sums, -1);
        bool below = false;
        for (double v : rho) {
            below = below || v < opts.lo;
        }
        if (below || max_lag >= cap) {
            break;
        }
        max_lag = std::min(2 * max_lag, cap);
    }
    const Fit full = fit_window(rho, dt, opts.hi, opts.lo);
    if (!full.decayed) {
        r.flagged = true;
        r.note = "autocorrelation never drops below the window floor";
        return r;
    }
    if (full.points < 3) {
        r.flagged = true;
        r.note = "fewer than 3 lags inside the fit window; not exponential at this resolution";
        return r;
    }
    r.estimate = full.rate;
    std::vector<double> theta;
    for (int b = 0; b < opts.blocks; ++b) {
        const Fit f = fit_window(rho_from(sums, b), dt, opts.hi, opts.lo);
        if (f.points >= 2) {
            theta.push_back(f.rate);
        }
    }
    if (theta.size() < 2) {
        r.flagged = true;
        r.note = "jackknife replicates failed to fit";
        return r;
    }
    const double g = static_cast<double>(theta.size());
    const double m = std::accumulate(theta.begin(), theta.end(), 0.0) / g;
    double ss = 0.0;
    for (double t : theta) {
        ss += (t - m) * (t - m);
    }
    r.std_error = std::sqrt(ss * (g - 1.0) / g);
    return r;
}

GapReport autocorr_gap(const Trajectory& traj, int column, AutocorrOptions opts)
{
    if (traj.grid_dt <= 0.0 || column < 0 || column >= static_cast<int>(traj.grid_values.size())) {
        throw std::invalid_argument("autocorr_gap: trajectory has no grid record for this column");
    }
    GapReport r = autocorr_gap_series(traj.grid_values[column], traj.grid_dt, opts);
    r.n = traj.initial.n();
    return r;
}

} // namespace kac
