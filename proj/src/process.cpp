#include "kac/process.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <stdexcept>

#include "kac/sampling.hpp"

namespace kac {

namespace {

constexpr std::int64_t kReprojectEvery = 1'000'000;
constexpr std::int64_t kRebuildEvery = 4096;

double exp_wait(double rate, Rng& rng)
{
    return std::exponential_distribution<double>(rate)(rng);
}

Vec3 scatter_reference(const Vec3& vi, const Vec3& vj)
{
    const Vec3 d = vi - vj;
    const double g = norm(d);
    return g > 0.0 ? d / g : Vec3{0.0, 0.0, 1.0};
}

int pick_index(const std::vector<double>& weights, double total, Rng& rng)
{
    const double u = uniform01(rng) * total;
    double acc = 0.0;
    int last = -1;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] <= 0.0) {
            continue;
        }
        acc += weights[i];
        last = static_cast<int>(i);
        if (u < acc) {
            return last;
        }
    }
    return last;
}

} // namespace

std::pair<ParticleState, JumpEvent> kac_step(const ParticleState& state, const KernelSpec& kernel, Rng& rng)
{
    const int n = state.n();
    std::vector<double> rates;
    std::vector<std::pair<int, int>> pairs;
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double r = pair_rate(state, i, j, kernel.alpha);
            rates.push_back(r);
            pairs.emplace_back(i, j);
            total += r;
        }
    }
    if (!(total > 0.0)) {
        throw std::runtime_error("kac_step: total collision rate is zero");
    }
    JumpEvent ev;
    ev.kind = JumpKind::KacCollision;
    ev.wait = exp_wait(total, rng);
    ev.t = ev.wait;
    const auto [i, j] = pairs[static_cast<std::size_t>(pick_index(rates, total, rng))];
    ev.a = i;
    ev.b = j;
    ev.sigma = sample_scatter_direction(scatter_reference(state.v[i], state.v[j]), kernel, rng);
    ParticleState out = state;
    apply_collision_inplace(out, i, j, ev.sigma);
    return {std::move(out), ev};
}

std::vector<double> conjugate_rates(const ParticleState& state, double alpha)
{
    const int n = state.n();
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        out[k] = weight_w_pow(state.v[k], n, alpha) / n;
    }
    return out;
}

std::pair<ParticleState, JumpEvent> conjugate_step(const ParticleState& state, double alpha, Rng& rng)
{
    const int n = state.n();
    if (n < 3) {
        throw std::invalid_argument("conjugate_step: the conjugate process needs N >= 3");
    }
    const auto rates = conjugate_rates(state, alpha);
    double total = 0.0;
    for (double r : rates) {
        total += r;
    }
    if (!(total > 0.0)) {
        throw std::runtime_error("conjugate_step: all rates vanish");
    }
    JumpEvent ev;
    ev.kind = JumpKind::ConjugateResample;
    ev.wait = exp_wait(total, rng);
    ev.t = ev.wait;
    ev.a = pick_index(rates, total, rng);
    ParticleState out = sample_conditional_slice(state.v[ev.a], ev.a, n, rng);
    out.energy = state.energy;
    out.momentum = state.momentum;
    return {std::move(out), ev};
}

KacSimulator::KacSimulator(ParticleState state, KernelSpec kernel, int rejection_threshold)
    : state_(std::move(state)), kernel_(std::move(kernel)), rejection_(state_.n() > rejection_threshold)
{
    const int n = state_.n();
    if (n < 2) {
        throw std::invalid_argument("KacSimulator: N must be at least 2");
    }
    bound_ = pow_alpha(2.0 * std::sqrt(n - 1.0), kernel_.alpha);
    if (!rejection_) {
        table_.assign(static_cast<std::size_t>(n * n), 0.0);
        rowsum_.assign(static_cast<std::size_t>(n), 0.0);
    }
    rebuild();
}

double KacSimulator::rate(int i, int j) const
{
    return pair_rate_prefactor(state_.n()) * pow_alpha(norm(state_.v[i] - state_.v[j]), kernel_.alpha);
}

void KacSimulator::rebuild()
{
    const int n = state_.n();
    if (rejection_) {
        total_ = n * bound_;
        return;
    }
    std::fill(rowsum_.begin(), rowsum_.end(), 0.0);
    total_ = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            const double r = rate(i, j);
            table_[i * n + j] = r;
            table_[j * n + i] = r;
            rowsum_[i] += r;
            rowsum_[j] += r;
            total_ += r;
        }
    }
}

void KacSimulator::refresh_rows(int i, int j)
{
    const int n = state_.n();
    for (int row : {i, j}) {
        for (int k = 0; k < n; ++k) {
            if (k == row || (row == j && k == i)) {
                continue;
            }
            const double r = rate(row, k);
            const double d = r - table_[row * n + k];
            table_[row * n + k] = r;
            table_[k * n + row] = r;
            rowsum_[row] += d;
            rowsum_[k] += d;
            total_ += d;
        }
    }
}

JumpEvent KacSimulator::step(Rng& rng)
{
    const int n = state_.n();
    JumpEvent ev;
    ev.kind = JumpKind::KacCollision;
    if (rejection_) {
        const double wait_rate = total_;
        double waited = 0.0;
        std::uniform_int_distribution<int> pick(0, n - 1);
        for (;;) {
            waited += exp_wait(wait_rate, rng);
            int i = pick(rng);
            int j = pick(rng);
            while (j == i) {
                j = pick(rng);
            }
            const double accept = pow_alpha(norm(state_.v[i] - state_.v[j]), kernel_.alpha) / bound_;
            if (uniform01(rng) < accept) {
                ev.a = std::min(i, j);
                ev.b = std::max(i, j);
                break;
            }
        }
        ev.wait = waited;
    } else {
        if (!(total_ > 0.0)) {
            throw std::runtime_error("KacSimulator: total collision rate is zero");
        }
        ev.wait = exp_wait(total_, rng);
        // P(i then j) + P(j then i) = r_ij / total
        const int i = pick_index(rowsum_, 2.0 * total_, rng);
        double acc = 0.0;
        const double u = uniform01(rng) * rowsum_[i];
        int j = -1;
        for (int k = 0; k < n; ++k) {
            const double r = table_[i * n + k];
            if (k == i || r <= 0.0) {
                continue;
            }
            acc += r;
            j = k;
            if (u < acc) {
                break;
            }
        }
        ev.a = std::min(i, j);
        ev.b = std::max(i, j);
    }
    ev.sigma = sample_scatter_direction(scatter_reference(state_.v[ev.a], state_.v[ev.b]), kernel_, rng);
    apply_collision_inplace(state_, ev.a, ev.b, ev.sigma);
    t_ += ev.wait;
    ev.t = t_;
    ++events_;
    if (events_ % kReprojectEvery == 0) {
        reproject(state_);
        rebuild();
    } else if (!rejection_) {
        if (events_ % kRebuildEvery == 0) {
            rebuild();
        } else {
            refresh_rows(ev.a, ev.b);
        }
    }
    return ev;
}

ConjugateSimulator::ConjugateSimulator(ParticleState state, double alpha) : state_(std::move(state)), alpha_(alpha)
{
    if (state_.n() < 3) {
        throw std::invalid_argument("ConjugateSimulator: the conjugate process needs N >= 3");
    }
    refresh();
}

void ConjugateSimulator::refresh()
{
    rates_ = conjugate_rates(state_, alpha_);
    total_ = 0.0;
    for (double r : rates_) {
        total_ += r;
    }
}

JumpEvent ConjugateSimulator::step(Rng& rng)
{
    if (!(total_ > 0.0)) {
        throw std::runtime_error("ConjugateSimulator: all rates vanish");
    }
    JumpEvent ev;
    ev.kind = JumpKind::ConjugateResample;
    ev.wait = exp_wait(total_, rng);
    ev.a = pick_index(rates_, total_, rng);
    const double e = state_.energy;
    const Vec3 p = state_.momentum;
    state_ = sample_conditional_slice(state_.v[ev.a], ev.a, state_.n(), rng);
    state_.energy = e;
    state_.momentum = p;
    t_ += ev.wait;
    ev.t = t_;
    refresh();
    return ev;
}

Trajectory simulate(const ParticleState& state, ProcessKind process, const KernelSpec& kernel, StopRule stop,
                    const std::vector<TrialFunction>& observables, Rng& rng, RecordOptions record)
{
    if (!std::isfinite(stop.t_max) && stop.max_events < 0) {
        throw std::invalid_argument("simulate: need a finite t_max or max_events");
    }
    Trajectory traj;
    traj.initial = state;
    traj.grid_dt = record.grid_dt;
    for (const auto& f : observables) {
        traj.observable_names.push_back(f.name());
    }
    const std::size_t nobs = observables.size();
    std::vector<double> values(nobs);
    auto evaluate = [&](const ParticleState& s) {
        for (std::size_t c = 0; c < nobs; ++c) {
            values[c] = observables[c](s);
        }
    };
    evaluate(state);
    if (record.event_observables) {
        traj.event_values.push_back(values);
    }
    traj.grid_values.assign(nobs, {});
    std::int64_t grid_index = 0;
    auto fill_grid = [&](double until) {
        if (record.grid_dt <= 0.0 || nobs == 0) {
            return;
        }
        const double limit = std::min(until, stop.t_max);
        while (static_cast<double>(grid_index) * record.grid_dt < limit) {
            for (std::size_t c = 0; c < nobs; ++c) {
                traj.grid_values[c].push_back(values[c]);
            }
            ++grid_index;
        }
    };

    std::unique_ptr<KacSimulator> kac;
    std::unique_ptr<ConjugateSimulator> conj;
    if (process == ProcessKind::Kac) {
        kac = std::make_unique<KacSimulator>(state, kernel);
    } else {
        conj = std::make_unique<ConjugateSimulator>(state, kernel.alpha);
    }
    double t = 0.0;
    bool hit_time = false;
    while (stop.max_events < 0 || traj.n_events < stop.max_events) {
        JumpEvent ev = kac ? kac->step(rng) : conj->step(rng);
        if (ev.t > stop.t_max) {
            hit_time = true;
            break;
        }
        fill_grid(ev.t);
        t = ev.t;
        ++traj.n_events;
        const ParticleState& now = kac ? kac->state() : conj->state();
        if (nobs > 0 && (record.event_observables || record.grid_dt > 0.0)) {
            evaluate(now);
        }
        if (record.events) {
            traj.events.push_back(ev);
        }
        if (record.event_observables) {
            traj.event_values.push_back(values);
        }
    }
    traj.t_end = hit_time ? stop.t_max : t;
    fill_grid(traj.t_end);
    traj.final_state = kac ? kac->state() : conj->state();
    return traj;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out)
{
    out << "t,event_kind,idx_a,idx_b";
    for (const auto& name : traj.observable_names) {
        out << ',' << name;
    }
    out << '\n';
    out.precision(17);
    auto row_values = [&](std::size_t r) {
        if (r < traj.event_values.size()) {
            for (double x : traj.event_values[r]) {
                out << ',' << x;
            }
        }
        out << '\n';
    };
    out << 0.0 << ",init,-1,-1";
    row_values(0);
    for (std::size_t e = 0; e < traj.events.size(); ++e) {
        const auto& ev = traj.events[e];
        const bool kac = ev.kind == JumpKind::KacCollision;
        out << ev.t << ',' << (kac ? "kac" : "conjugate") << ',' << ev.a << ',' << (kac ? ev.b : -1);
        row_values(e + 1);
    }
}

double estimate_Pk(const TrialFunction& f, const ParticleState& state, int k, std::int64_t n_samples, Rng& rng)
{
    if (n_samples < 1) {
        throw std::invalid_argument("estimate_Pk: need at least one sample");
    }
    double acc = 0.0;
    for (std::int64_t s = 0; s < n_samples; ++s) {
        acc += f(sample_conditional_slice(state.v[k], k, state.n(), rng));
    }
    return acc / static_cast<double>(n_samples);
}

} // namespace kac
