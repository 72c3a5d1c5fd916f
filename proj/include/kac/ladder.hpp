#pragma once

#include <functional>
#include <vector>

namespace kac {

/// Explicit lower bound on the conjugate gap,
/// ((N-1)/N)^{1-alpha/2} (1 - 1/(N-1) - (8/3)/(N-1)^2 - (2/3)/(N-1)^3).
/// Informative for N >= 4; negative at N = 3.
double conjugate_alpha_bound(int n, double alpha);

/// 1 - 1/N - C/N^{3/2}.
double conjugate_bound(int n, double c);

struct LadderStep {
    int n = 2;
    double conjugate_lower = 0.0; // unused at N = 2
    double gap_lower = 0.0;
};

/// Delta_N >= (N/(N-1)) Delta_{N-1} conj(N), from Delta_2 = seed_gap_2 up to
/// n_max. Throws std::invalid_argument on a nonpositive seed or bound.
std::vector<LadderStep> gap_ladder(int n_max, double seed_gap_2, const std::function<double(int)>& conjugate_lower);

} // namespace kac
