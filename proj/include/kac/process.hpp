#pragma once

#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "kac/core.hpp"
#include "kac/kernel.hpp"
#include "kac/rng.hpp"
#include "kac/trial.hpp"

namespace kac {

enum class ProcessKind { Kac, Conjugate };
enum class JumpKind { KacCollision, ConjugateResample };

struct JumpEvent {
    JumpKind kind = JumpKind::KacCollision;
    int a = 0;  // i for a collision, k for a resample
    int b = -1; // j for a collision
    Vec3 sigma{};
    double wait = 0.0;
    double t = 0.0;
};

/// One Kac jump from scratch: O(N^2) rates, exponential wait, pair drawn in
/// proportion to its rate, sigma from the kernel about unit(v_i - v_j).
/// Throws std::runtime_error when every pair rate vanishes.
std::pair<ParticleState, JumpEvent> kac_step(const ParticleState& state, const KernelSpec& kernel, Rng& rng);

/// lambda_k = w_N(v_k)^{alpha/2} / N.
std::vector<double> conjugate_rates(const ParticleState& state, double alpha);

/// One conjugate jump: k drawn in proportion to lambda_k, then every other
/// coordinate resampled uniformly on the slice {v_k fixed}. Requires N >= 3.
std::pair<ParticleState, JumpEvent> conjugate_step(const ParticleState& state, double alpha, Rng& rng);

/// Kac process with an incrementally maintained pair-rate table (O(N) per
/// collision). Above `rejection_threshold` particles pairs are proposed
/// uniformly and thinned against the bound |v_i - v_j| <= 2 sqrt(N-1).
class KacSimulator {
  public:
    KacSimulator(ParticleState state, KernelSpec kernel, int rejection_threshold = 256);

    JumpEvent step(Rng& rng);
    const ParticleState& state() const { return state_; }
    double time() const { return t_; }
    double total_rate() const { return total_; }
    bool uses_rejection() const { return rejection_; }
    std::int64_t events() const { return events_; }

  private:
    void rebuild();
    void refresh_rows(int i, int j);
    double rate(int i, int j) const;

    ParticleState state_;
    KernelSpec kernel_;
    bool rejection_;
    std::vector<double> table_; // N x N, zero diagonal
    std::vector<double> rowsum_;
    double total_ = 0.0;
    double t_ = 0.0;
    double bound_ = 0.0;
    std::int64_t events_ = 0;
};

class ConjugateSimulator {
  public:
    ConjugateSimulator(ParticleState state, double alpha);

    JumpEvent step(Rng& rng);
    const ParticleState& state() const { return state_; }
    double time() const { return t_; }
    double total_rate() const { return total_; }

  private:
    void refresh();

    ParticleState state_;
    double alpha_;
    std::vector<double> rates_;
    double total_ = 0.0;
    double t_ = 0.0;
};

struct StopRule {
    double t_max = std::numeric_limits<double>::infinity();
    std::int64_t max_events = -1; // negative: unlimited
};

struct RecordOptions {
    bool events = true;            // keep the JumpEvent list
    bool event_observables = true; // observable row after every event
    double grid_dt = 0.0;          // > 0: observables on t = 0, dt, 2 dt, ...
};

struct Trajectory {
    ParticleState initial;
    ParticleState final_state;
    double t_end = 0.0;
    std::int64_t n_events = 0;
    std::vector<JumpEvent> events;
    std::vector<std::string> observable_names;
    /// Row 0 is the initial state, row e+1 follows event e.
    std::vector<std::vector<double>> event_values;
    double grid_dt = 0.0;
    /// grid_values[c][i] = observable c at time i * grid_dt.
    std::vector<std::vector<double>> grid_values;
};

/// Runs the chosen process until the stop rule fires. Deterministic given the
/// RNG state. At least one of t_max / max_events must be finite.
Trajectory simulate(const ParticleState& state, ProcessKind process, const KernelSpec& kernel, StopRule stop,
                    const std::vector<TrialFunction>& observables, Rng& rng, RecordOptions record = {});

/// CSV with columns t, event_kind, idx_a, idx_b, then one per observable.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

/// Monte Carlo estimate of P_k f at `state`: mean of f over uniform samples of
/// the slice {v_k fixed}.
double estimate_Pk(const TrialFunction& f, const ParticleState& state, int k, std::int64_t n_samples, Rng& rng);

} // namespace kac
