#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kac/parallel.hpp"
#include "kac/report.hpp"

namespace kac {

struct VerifyOptions {
    std::vector<int> n_list{3, 4, 8};
    std::uint64_t seed = 0x5eed;
    double scale = 1.0; // multiplies every Monte Carlo sample size
    Exec exec = Exec::Parallel;
};

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    std::vector<Check> checks;
    double seconds = 0.0;
};

inline constexpr int kCriterionCount = 13;

/// Runs acceptance criterion `id` in 1..kCriterionCount.
CriterionResult run_criterion(int id, const VerifyOptions& opts);

/// Every criterion in order; `on_done` is called after each one.
std::vector<CriterionResult> run_all(const VerifyOptions& opts,
                                     const std::function<void(const CriterionResult&)>& on_done = {});

/// "PASS  3  title  (12.3 s)" style line.
std::string summary_line(const CriterionResult& r);

} // namespace kac
