// kac-gap: experiment driver.
//   kac-gap <experiment> [--config PATH] [--seed S] [--out DIR] [--replicas R] [--n-samples M]
// Exit status: 0 all checks pass, 1 a statistical check failed, 2 usage or configuration error.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "kac/autocorr.hpp"
#include "kac/chaos.hpp"
#include "kac/config.hpp"
#include "kac/ladder.hpp"
#include "kac/process.hpp"
#include "kac/report.hpp"
#include "kac/sampling.hpp"
#include "kac/spectral.hpp"
#include "kac/state_io.hpp"
#include "kac/verify.hpp"

namespace fs = std::filesystem;
using namespace kac;

namespace {

constexpr std::int64_t kMaxWrittenStates = 100'000;

Check check(std::string name, double est, double se, double ref, std::string prov, bool pass, std::string note = {})
{
    Check c;
    c.name = std::move(name);
    c.estimate = est;
    c.std_error = se;
    c.reference = ref;
    c.provenance = std::move(prov);
    c.pass = pass;
    c.note = std::move(note);
    return c;
}

std::string tag(int n) { return "N" + std::to_string(n); }

void write_text(const fs::path& p, const std::string& text)
{
    std::ofstream out(p);
    if (!out) {
        throw std::runtime_error("cannot write " + p.string());
    }
    out << text;
}

std::vector<Check> run_sample(const ExperimentConfig& cfg, const fs::path& dir)
{
    std::vector<Check> checks;
    for (int n : cfg.n_list) {
        const Seed seed = child_seed(Seed{cfg.seed}, static_cast<std::uint64_t>(n));
        const int orders[3] = {2, 4, 6};
        for (const auto& m : marginal_moments(n, orders, cfg.n_samples, seed)) {
            checks.push_back(check("sample-" + m.observable + "-" + tag(n), m.estimate, m.std_error, m.reference,
                                   m.provenance, std::abs(m.estimate - m.reference) <= 3.0 * m.std_error + 1e-12,
                                   "Gaussian limit " + std::to_string(m.gaussian_reference)));
        }
        Rng rng = make_stream(seed, 0x57524954ULL, 0);
        std::vector<ParticleState> states;
        const std::int64_t count = std::min(cfg.n_samples, kMaxWrittenStates);
        states.reserve(static_cast<std::size_t>(count));
        double worst = 0.0;
        for (std::int64_t i = 0; i < count; ++i) {
            states.push_back(sample_invariant_recursive(n, rng));
            const Diagnostics d = validate(states.back());
            worst = std::max({worst, d.energy_defect, d.momentum_defect});
        }
        write_states((dir / ("states_" + tag(n) + ".bin")).string(), states);
        checks.push_back(check("sample-constraints-" + tag(n), worst, 0.0, 0.0, "exact identity", worst <= kConstraintTol,
                               "largest constraint defect among written states"));
    }
    return checks;
}

std::vector<Check> run_simulate(const ExperimentConfig& cfg, const fs::path& dir)
{
    std::vector<Check> checks;
    const KernelSpec kernel = make_kernel(cfg);
    const ProcessKind kind = cfg.process == "kac" ? ProcessKind::Kac : ProcessKind::Conjugate;
    for (int n : cfg.n_list) {
        if (kind == ProcessKind::Conjugate && n < 3) {
            throw std::invalid_argument("[simulate].N: the conjugate process needs N >= 3");
        }
        auto basis = std::make_shared<const SingleParticleBasis>(n, n == 2 ? 0 : 4, 2);
        std::vector<TrialFunction> obs{single_particle(basis, 0, 1)};
        if (n > 2) {
            obs.push_back(single_particle(basis, 0, 4));
        }
        Rng rng = make_stream(child_seed(Seed{cfg.seed}, static_cast<std::uint64_t>(n)), 0x53494dULL, 0);
        const ParticleState start = sample_invariant_recursive(n, rng);
        StopRule stop;
        stop.max_events = cfg.max_events;
        if (cfg.t_max > 0.0) {
            stop.t_max = cfg.t_max;
        }
        if (cfg.max_events == 0 && cfg.t_max == 0.0) {
            throw std::invalid_argument("[simulate].max_events: set max_events or t_max");
        }
        RecordOptions rec;
        const Trajectory traj = simulate(start, kind, kernel, stop, obs, rng, rec);
        std::ofstream csv(dir / ("trajectory_" + tag(n) + ".csv"));
        if (!csv) {
            throw std::runtime_error("cannot write trajectory csv");
        }
        write_trajectory_csv(traj, csv);
        const Diagnostics d = validate(traj.final_state, 1e-8);
        checks.push_back(check("simulate-constraints-" + tag(n), std::max(d.energy_defect, d.momentum_defect), 0.0, 0.0,
                               "exact identity", d.ok,
                               std::to_string(traj.n_events) + " events up to t = " + std::to_string(traj.t_end)));
    }
    return checks;
}

std::vector<Check> run_gap(const ExperimentConfig& cfg, const fs::path& dir)
{
    std::vector<Check> checks;
    const KernelSpec kernel = make_kernel(cfg);
    const ProcessKind kind = cfg.process == "kac" ? ProcessKind::Kac : ProcessKind::Conjugate;
    for (int n : cfg.n_list) {
        if (kind == ProcessKind::Conjugate && n < 3) {
            throw std::invalid_argument("[gap].N: the conjugate process needs N >= 3");
        }
        auto basis = std::make_shared<const SingleParticleBasis>(n);
        const auto family = default_trial_family(basis);
        const GapReport r = variational_gap(kind, kernel, family, cfg.n_samples,
                                            child_seed(Seed{cfg.seed}, static_cast<std::uint64_t>(n)), cfg.replicas);
        write_text(dir / ("gap_" + cfg.process + "_" + tag(n) + ".json"), to_json(r) + "\n");
        const std::string name = "gap-" + cfg.process + "-" + tag(n);
        if (kind == ProcessKind::Kac && n == 2) {
            const double ref = std::pow(2.0, cfg.alpha + 1.0);
            const double tol = cfg.tol("n2_relative", 0.02);
            checks.push_back(check(name, r.estimate, r.std_error, ref, "closed form",
                                   std::abs(r.estimate - ref) <= tol * ref, r.note));
        } else if (kind == ProcessKind::Conjugate && n >= 4) {
            const double bound = conjugate_alpha_bound(n, cfg.alpha);
            checks.push_back(check(name, r.estimate, r.std_error, bound, "explicit lower bound",
                                   r.estimate >= bound - 3.0 * r.std_error,
                                   "variational upper bound must not fall below the explicit lower bound"));
        } else {
            Check c = check(name, r.estimate, r.std_error, 0.0, "variational upper bound", r.estimate > 0.0,
                            "no closed form at this N");
            c.informational = true;
            checks.push_back(c);
        }
    }
    return checks;
}

std::vector<Check> run_spectrum(const ExperimentConfig& cfg, const fs::path& dir)
{
    std::vector<Check> checks;
    const double tol = cfg.tol("spectrum", 0.01);
    for (int n : cfg.n_list) {
        if (n < 3) {
            throw std::invalid_argument("[spectrum].N: the K operator needs N >= 3");
        }
        const SingleParticleBasis basis(n);
        const KSpectrum ks = K_spectrum(n, basis, cfg.n_samples, child_seed(Seed{cfg.seed}, static_cast<std::uint64_t>(n)));
        std::ofstream km(dir / ("K_matrix_" + tag(n) + ".csv"));
        write_matrix_csv(ks.matrix, km);
        std::ofstream ev(dir / ("K_eigenvalues_" + tag(n) + ".csv"));
        ev << "index,eigenvalue,sector\n";
        for (Eigen::Index i = 0; i < ks.eigenvalues.size(); ++i) {
            ev << i << ',' << ks.eigenvalues[i] << ',' << ks.sector[static_cast<std::size_t>(i)] << '\n';
        }
        const KClosedForm cf = closed_form_k_eigenvalues(n);
        const Eigen::Index m = ks.eigenvalues.size();
        checks.push_back(check("K-top-" + tag(n), ks.eigenvalues[m - 1], 0.0, 1.0, "closed form",
                               std::abs(ks.eigenvalues[m - 1] - 1.0) <= tol));
        const double lo = ks.eigenvalues[0];
        double hi = -1.0;
        for (Eigen::Index i = 0; i + 1 < m; ++i) {
            hi = std::max(hi, ks.eigenvalues[i]);
        }
        checks.push_back(check("K-bounds-" + tag(n), hi, 0.0, cf.top, "closed form",
                               std::min(lo, cf.conserved) >= std::min(cf.bottom, cf.conserved) - tol && hi <= cf.top + tol,
                               "non-constant spectrum within [bottom, top], conserved modes at -1/(N-1)"));
        std::vector<double> kap(ks.eigenvalues.data(), ks.eigenvalues.data() + m);
        const P0Spectrum p0 = p0_block_spectrum(n, kap);
        checks.push_back(check("mu0-" + tag(n), p0.mu0, 0.0, mu0_closed_form(n), "closed form",
                               std::abs(p0.mu0 - mu0_closed_form(n)) <= tol));
    }
    return checks;
}

std::vector<Check> run_chaos(const ExperimentConfig& cfg, const fs::path&)
{
    std::vector<Check> checks;
    for (int n : cfg.n_list) {
        const Seed seed = child_seed(Seed{cfg.seed}, static_cast<std::uint64_t>(n));
        const int orders[2] = {4, 6};
        for (const auto& m : marginal_moments(n, orders, cfg.n_samples, seed)) {
            checks.push_back(check("chaos-" + m.observable + "-" + tag(n), m.estimate, m.std_error, m.reference,
                                   m.provenance, std::abs(m.estimate - m.reference) <= 3.0 * m.std_error,
                                   "Gaussian limit " + std::to_string(m.gaussian_reference)));
        }
        if (n >= 3) {
            const JointChaosReport j = joint_chaos_test(n, std::min(n, 3), cfg.n_samples, child_seed(seed, 1));
            checks.push_back(check("chaos-v1.v2-" + tag(n), j.v1v2.value, j.v1v2.std_error, j.v1v2_reference,
                                   "closed form", std::abs(j.v1v2.value - j.v1v2_reference) <= 3.0 * j.v1v2.std_error));
            checks.push_back(check("chaos-high-modes-" + tag(n), j.max_high_mode_cov, j.max_high_mode_se,
                                   j.high_mode_bound, "closed form", j.pass,
                                   "largest high-mode cross covariance against the top K eigenvalue"));
            const Estimate w = wdev_lp(n, 2.0, 2.0, cfg.n_samples, child_seed(seed, 2));
            const double exact = std::sqrt(wdev_alpha2_p2_exact(n));
            checks.push_back(check("chaos-wdev-alpha2-" + tag(n), w.value, w.std_error, exact, "closed form",
                                   std::abs(w.value - exact) <= 3.0 * w.std_error + 1e-12));
        }
    }
    return checks;
}

std::vector<Check> run_verify_all(const ExperimentConfig& cfg)
{
    VerifyOptions opts;
    opts.n_list = cfg.n_list;
    opts.seed = cfg.seed;
    opts.scale = static_cast<double>(cfg.n_samples) / 1e6;
    std::vector<Check> checks;
    run_all(opts, [&](const CriterionResult& r) {
        std::cout << summary_line(r) << std::endl;
        checks.insert(checks.end(), r.checks.begin(), r.checks.end());
    });
    return checks;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Spectral gap experiments for the Kac hard-sphere process"};
    std::string experiment;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<int> replicas;
    std::optional<std::int64_t> n_samples;
    app.add_option("experiment", experiment, "sample | simulate | gap | spectrum | chaos | verify-all")
        ->required()
        ->check(CLI::IsMember(experiment_names()));
    app.add_option("--config", config_path, "key = value config file with one [section] per experiment");
    app.add_option("--seed", seed, "master seed");
    app.add_option("--out", out, "output directory");
    app.add_option("--replicas", replicas, "jackknife replica groups");
    app.add_option("--n-samples", n_samples, "Monte Carlo sample size");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    ExperimentConfig cfg;
    try {
        if (config_path.empty()) {
            cfg = default_config(experiment);
        } else {
            std::ifstream in(config_path);
            if (!in) {
                std::cerr << "--config: cannot open " << config_path << "\n";
                return 2;
            }
            cfg = parse_config(in, experiment);
        }
        if (seed) {
            cfg.seed = *seed;
        }
        if (out) {
            cfg.output = *out;
        }
        if (replicas) {
            cfg.replicas = *replicas;
        }
        if (n_samples) {
            cfg.n_samples = *n_samples;
        }
        if (auto errs = validate(cfg); !errs.empty()) {
            throw ConfigError(std::move(errs));
        }
    } catch (const ConfigError& e) {
        for (const auto& m : e.messages()) {
            std::cerr << "config error: " << m << "\n";
        }
        return 2;
    }

    const auto t0 = std::chrono::steady_clock::now();
    RunReport report;
    report.run_id = make_run_id();
    report.config_echo = to_json(cfg);
    try {
        const fs::path dir(cfg.output);
        fs::create_directories(dir);
        if (experiment == "sample") {
            report.checks = run_sample(cfg, dir);
        } else if (experiment == "simulate") {
            report.checks = run_simulate(cfg, dir);
        } else if (experiment == "gap") {
            report.checks = run_gap(cfg, dir);
        } else if (experiment == "spectrum") {
            report.checks = run_spectrum(cfg, dir);
        } else if (experiment == "chaos") {
            report.checks = run_chaos(cfg, dir);
        } else {
            report.checks = run_verify_all(cfg);
        }
        report.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        emit_report(report, cfg.output);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    int failed = 0;
    for (const auto& c : report.checks) {
        if (!c.pass && !c.informational) {
            std::cout << "FAIL " << c.name << ": estimate " << c.estimate << " +- " << c.std_error << ", reference "
                      << c.reference << "\n";
            ++failed;
        }
    }
    std::cout << report.checks.size() << " checks, " << failed << " failed; report in " << cfg.output << "\n";
    return all_pass(report.checks) ? 0 : 1;
}
