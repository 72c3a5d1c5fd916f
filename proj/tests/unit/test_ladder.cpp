#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "kac/ladder.hpp"

using namespace kac;

TEST_CASE("explicit conjugate bound")
{
    CHECK(conjugate_alpha_bound(4, 2.0) == doctest::Approx(28.0 / 81.0));
    CHECK(conjugate_alpha_bound(3, 1.0) < 0.0);
    CHECK(conjugate_alpha_bound(4, 0.0) == doctest::Approx(0.75 * 28.0 / 81.0));
    for (int n = 5; n < 200; n += 7) {
        CHECK(conjugate_alpha_bound(n, 2.0) > conjugate_alpha_bound(n - 1, 2.0));
        CHECK(conjugate_alpha_bound(n, 2.0) < 1.0);
    }
    CHECK_THROWS_AS(conjugate_alpha_bound(2, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(conjugate_alpha_bound(5, 2.5), std::invalid_argument);
    CHECK(conjugate_bound(100, 0.0) == doctest::Approx(0.99));
    CHECK(conjugate_bound(4, 1.0) == doctest::Approx(0.75 - 0.125));
}

TEST_CASE("gap ladder recursion")
{
    const auto steps = gap_ladder(6, 2.0, [](int n) { return 1.0 - 1.0 / n; });
    REQUIRE(steps.size() == 5);
    CHECK(steps[0].gap_lower == 2.0);
    double g = 2.0;
    for (std::size_t i = 1; i < steps.size(); ++i) {
        const int n = steps[i].n;
        g *= (n / (n - 1.0)) * (1.0 - 1.0 / n);
        CHECK(steps[i].gap_lower == doctest::Approx(g));
    }
    // (N/(N-1)) (1 - 1/N) = 1, so the product telescopes to the seed
    CHECK(steps.back().gap_lower == doctest::Approx(2.0));
    CHECK_THROWS_AS(gap_ladder(5, 0.0, [](int) { return 0.5; }), std::invalid_argument);
    CHECK_THROWS_AS(gap_ladder(5, 1.0, [](int n) { return conjugate_alpha_bound(n, 2.0); }),
                    std::invalid_argument);
    CHECK_THROWS_AS(gap_ladder(1, 1.0, [](int) { return 0.5; }), std::invalid_argument);
}
