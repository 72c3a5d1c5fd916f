#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "kac/parallel.hpp"
#include "kac/vec3.hpp"

namespace kac {

struct MomentReport {
    int n = 0;
    std::string observable;
    double estimate = 0.0;
    double std_error = 0.0;
    double reference = 0.0;          // exact value under sigma_N
    double gaussian_reference = 0.0; // N -> infinity limit
    std::string provenance;
};

/// E|v_1|^m for each even m in `orders`, averaged over all particles of each sample.
std::vector<MomentReport> marginal_moments(int n, std::span<const int> orders, std::int64_t n_samples, Seed seed,
                                           Exec exec = Exec::Parallel);

struct CondMoment {
    Estimate mc;          // Monte Carlo conditional fourth moment
    double s = 0.0;       // reference polynomial as stated
    double scaled_s = 0.0; // M * (leading polynomial), M the fourth moment of the inner marginal
    double exact = 0.0;   // closed form from the slice parameterisation
};

/// E{|v_1|^4 | v_N = v} with S(v) = (N^2 + |v|^4 - 2N|v|^2)/(N-1)^2.
CondMoment cond_moment4_one(int n, const Vec3& v, std::int64_t n_samples, Seed seed);

/// E{|v_1|^4 | (v_{N-1}, v_N) = (v, w)} with
/// S(v,w) = (N^2 + |v|^4 + |w|^4 + 2N|v|^2 + 2N|w|^2 + 2|v|^2|w|^2)/(N-2)^2.
/// `scaled_s` uses the leading term (N - |v|^2 - |w|^2)^2/(N-2)^2.
CondMoment cond_moment4_two(int n, const Vec3& v, const Vec3& w, std::int64_t n_samples, Seed seed);

/// E{|v_1|^8 | v_2 = v}.
Estimate cond_moment8_one(int n, const Vec3& v, std::int64_t n_samples, Seed seed);

/// Points |v| in {0, 0.5, 1, 1.5, sqrt((N-1)/2)} on the x axis.
std::vector<Vec3> conditional_grid(int n);

/// (E|w_N(v_k)^{alpha/2} - 1|^p)^{1/p}.
Estimate wdev_lp(int n, double alpha, double p, std::int64_t n_samples, Seed seed, Exec exec = Exec::Parallel);

/// Exact E(w_N(v) - 1)^2, from the marginal moments.
double wdev_alpha2_p2_exact(int n);

struct JointChaosReport {
    int n = 0;
    int k = 0;
    Estimate v1v2;
    double v1v2_reference = 0.0; // -1/(N-1)
    Estimate energy_cov;         // Cov(|v_1|^2, |v_2|^2)
    double energy_cov_reference = 0.0;
    double max_high_mode_cov = 0.0; // max |E eta_a(v_1) eta_b(v_2)| over iota >= 5
    double max_high_mode_se = 0.0;
    double high_mode_bound = 0.0; // (5N-3)/(3(N-1)^3)
    bool pass = false;
};

/// Mixed moments among the first k particles against their product values.
JointChaosReport joint_chaos_test(int n, int k, std::int64_t n_samples, Seed seed, Exec exec = Exec::Parallel);

struct CFit {
    double c = 0.0;
    std::vector<double> scaled; // N * deviation for each N
    bool stable = false;        // every scaled value within +-50% of c
};

/// Least-squares fit of N * deviation to a constant across the sweep.
CFit fit_c_over_n(std::span<const int> ns, std::span<const double> deviations);

} // namespace kac
