#include "kac/ladder.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace kac {

double conjugate_alpha_bound(int n, double alpha)
{
    if (n < 3 || alpha < 0.0 || alpha > 2.0) {
        throw std::invalid_argument("conjugate_alpha_bound: need N >= 3 and alpha in [0,2]");
    }
    const double m = n - 1.0;
    const double inner = 1.0 - 1.0 / m - (8.0 / 3.0) / (m * m) - (2.0 / 3.0) / (m * m * m);
    return std::pow(m / n, 1.0 - 0.5 * alpha) * inner;
}

double conjugate_bound(int n, double c)
{
    return 1.0 - 1.0 / n - c / std::pow(static_cast<double>(n), 1.5);
}

std::vector<LadderStep> gap_ladder(int n_max, double seed_gap_2, const std::function<double(int)>& conjugate_lower)
{
    if (!(seed_gap_2 > 0.0)) {
        throw std::invalid_argument("gap_ladder: the N=2 gap must be positive");
    }
    if (n_max < 2) {
        throw std::invalid_argument("gap_ladder: n_max must be at least 2");
    }
    std::vector<LadderStep> out{{2, 0.0, seed_gap_2}};
    for (int n = 3; n <= n_max; ++n) {
        const double c = conjugate_lower(n);
        if (!(c > 0.0)) {
            throw std::invalid_argument("gap_ladder: conjugate bound at N=" + std::to_string(n) +
                                        " is not positive");
        }
        out.push_back({n, c, (n / (n - 1.0)) * out.back().gap_lower * c});
    }
    return out;
}

} // namespace kac
