#pragma once

#include <span>
#include <vector>

#include "kac/process.hpp"
#include "kac/spectral.hpp"

namespace kac {

struct AutocorrOptions {
    double hi = 0.8; // window opens once rho drops below this
    double lo = 0.1; // and closes where rho drops below this
    int blocks = 16; // jackknife blocks
};

/// Normalised autocorrelation rho(0..max_lag) of an evenly sampled series,
/// products restricted to `blocks` contiguous blocks.
std::vector<double> autocorrelation(std::span<const double> x, int max_lag, int blocks = 1);

/// Relaxation rate from a least-squares fit of log rho(t) on the window.
/// Flags series whose rho never reaches `lo` or whose window has < 3 points.
GapReport autocorr_gap_series(std::span<const double> series, double dt, AutocorrOptions opts = {});

/// Same, on column `column` of a trajectory's uniform-grid record.
GapReport autocorr_gap(const Trajectory& traj, int column, AutocorrOptions opts = {});

} // namespace kac
