#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "kac/basis.hpp"
#include "kac/kernel.hpp"
#include "kac/parallel.hpp"
#include "kac/process.hpp"
#include "kac/trial.hpp"

namespace kac {

struct GapReport {
    std::string method;
    double estimate = 0.0;
    double std_error = 0.0;
    std::int64_t n_samples = 0;
    int n = 0;
    double alpha = 0.0;
    std::uint64_t seed = 0;
    int radial_deg = 0;
    int angular_deg = 0;
    bool flagged = false;
    std::string note;
    /// Variational methods: minimising combination of the trial family.
    Eigen::VectorXd coefficients;
};

std::string to_json(const GapReport& r);

// ---- correlation operator K -------------------------------------------------

/// K phi(v) = E{ phi(v_1) | v_2 = v } by Monte Carlo over the slice.
Estimate K_apply(const std::function<double(const Vec3&)>& phi, const Vec3& v, int n, std::int64_t n_samples,
                 Rng& rng);

struct KSpectrum {
    Eigen::VectorXd eigenvalues;  // ascending
    Eigen::MatrixXd eigenvectors; // columns, coordinates in the basis
    std::vector<int> sector;      // angular degree of each eigenpair
    Eigen::MatrixXd matrix;       // <eta_a, K eta_b>, rotation averaged
    double gram_min_eigenvalue = 0.0;
    std::int64_t n_samples = 0;
};

/// Monte Carlo spectrum of K on the span of `basis`. Rotation invariance makes
/// <eta_a, K eta_b> vanish unless (l, m) agree and be independent of m, so each
/// angular sector is assembled once from sum_{i != j} eta(v_i) eta(v_j) over all
/// ordered pairs and solved against the Monte Carlo Gram matrix of the same
/// samples. Throws if that Gram matrix is too far from the identity.
KSpectrum K_spectrum(int n, const SingleParticleBasis& basis, std::int64_t n_samples, Seed seed,
                     Exec exec = Exec::Parallel);

struct KClosedForm {
    double conserved = 0.0; // -1/(N-1), multiplicity 4
    double top = 0.0;       // (5N-3)/(3(N-1)^3)
    double bottom = 0.0;    // -(7N-3)/(3(N-1)^4)
};
KClosedForm closed_form_k_eigenvalues(int n);

struct P0Spectrum {
    double mu0 = 0.0;
    double gap0 = 0.0;
    std::vector<double> candidates;
};

/// Eigenvalues of P^(0) generated by K-eigenvalues kappa: (1 + (N-1) kappa)/N on
/// symmetric and (1 - kappa)/N on antisymmetric combinations. kappa = 1 is skipped.
P0Spectrum p0_block_spectrum(int n, std::span<const double> kappas);
double mu0_closed_form(int n);

// ---- Dirichlet forms ---------------------------------------------------------

/// Per-batch sums behind the Dirichlet and covariance matrices of a family.
struct FormAssembly {
    int size = 0;
    std::vector<Eigen::MatrixXd> a; // sum of Dirichlet-form samples
    std::vector<Eigen::MatrixXd> f2;
    std::vector<Eigen::VectorXd> f1;
    std::vector<std::int64_t> count;

    /// Pooled matrices, optionally leaving out the batches with b % groups == skip.
    void pooled(Eigen::MatrixXd& A, Eigen::MatrixXd& B, int groups = 1, int skip = -1) const;
};

struct KacFormOptions {
    double energy = 1.0;
    Vec3 momentum{};
    int max_pairs = 128; // pairs per state; all pairs when binom(N,2) is smaller
};

/// Kac Dirichlet matrix E_{N,alpha}(f_a, f_b) on S_{N,E,p}, f evaluated after
/// normalisation to S_{N,1,0}.
FormAssembly assemble_kac(const FamilyEvaluator& family, const KernelSpec& kernel, std::int64_t n_samples,
                          Seed seed, KacFormOptions opts = {}, Exec exec = Exec::Parallel);

/// Conjugate Dirichlet matrix D_{N,alpha}(f_a, f_b); (f - P_k f)(g - P_k g) is
/// estimated without bias from two independent slice draws.
FormAssembly assemble_conjugate(const FamilyEvaluator& family, double alpha, std::int64_t n_samples, Seed seed,
                                Exec exec = Exec::Parallel);

Estimate dirichlet_kac(const TrialFunction& f, const TrialFunction& g, const KernelSpec& kernel,
                       std::int64_t n_samples, Seed seed, KacFormOptions opts = {}, Exec exec = Exec::Parallel);

Estimate dirichlet_conjugate(const TrialFunction& f, double alpha, std::int64_t n_samples, Seed seed,
                             Exec exec = Exec::Parallel);

/// Variance of f under sigma_N.
Estimate variance_mc(const TrialFunction& f, std::int64_t n_samples, Seed seed, Exec exec = Exec::Parallel);

struct PairingCheck {
    Estimate g_Lf;
    Estimate f_Lg;
    Estimate difference; // <g, L f> - <L g, f>, paired
};

/// <g, L f> and <L g, f> with L applied by one-step conditional averaging.
PairingCheck generator_pairing(ProcessKind process, const TrialFunction& f, const TrialFunction& g,
                               const KernelSpec& kernel, std::int64_t n_samples, Seed seed,
                               Exec exec = Exec::Parallel);

// ---- gap estimators ----------------------------------------------------------

/// Smallest generalised eigenvalue of (A, B) after dropping B-directions below
/// 1e-8 of trace(B). Returns the eigenvalue and writes the minimiser.
double min_generalized_eigenvalue(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, Eigen::VectorXd* argmin);

/// Rayleigh-Ritz upper bound on the spectral gap over span(family), with a
/// jackknife error over `replicas` groups of batches.
GapReport variational_gap(ProcessKind process, const KernelSpec& kernel, const std::vector<TrialFunction>& family,
                          std::int64_t n_samples, Seed seed, int replicas = 16, Exec exec = Exec::Parallel);

/// Sum of family members weighted by `coefficients`.
TrialFunction combine(const std::vector<TrialFunction>& family, const Eigen::VectorXd& coefficients,
                      std::string name = "combination");

// ---- trial-function decomposition -------------------------------------------

struct Decomposition {
    TrialFunction g;                // iota >= 5
    TrialFunction s;                // iota in 1..4 with zero particle sums
    std::optional<TrialFunction> h; // residual, absent for sum-form input
    Eigen::Vector4d t{Eigen::Vector4d::Zero()}; // subtracted means t_1..t_4
    double phi_norm2 = 0.0;          // sum_k ||phi_k||^2 after recentring
};

/// Splits a sum form; requires every phi_j orthogonal to constants.
Decomposition trial_decompose(const TrialFunction& f);
/// Splits f = sum part + h, where h is supplied as the residual.
Decomposition trial_decompose(const TrialFunction& sum_part, const TrialFunction& h);

struct PkSReport {
    double stated_factor = 0.0;   // (N-2)/(N-1)
    double derived_factor = 0.0;  // N/(N-1)
    double chi2_stated = 0.0;
    double chi2_derived = 0.0;
    int points = 0;
    double max_abs_z_stated = 0.0;
    double max_abs_z_derived = 0.0;
    bool stated_pass = false;
    bool derived_pass = false;
};

/// Compares the Monte Carlo P_k s with factor * psi_k(v_k) at sampled states.
/// Passing means chi^2 <= dof + 5 sqrt(2 dof).
PkSReport verify_Pk_s(const TrialFunction& s, int n_states, std::int64_t inner_samples, Seed seed);

struct RecursionReport {
    Estimate direct;      // E_{N,alpha}(f, f)
    Estimate conditional; // (N/(N-1)) (1/N) sum_k E[w^{alpha/2}(v_k) E_{N-1,alpha}(f | v_k)]
    double z = 0.0;
};

/// Independent estimates of both sides of the conditional-form recursion.
RecursionReport recursion_check(const TrialFunction& f, const KernelSpec& kernel, std::int64_t n_samples, Seed seed,
                                Exec exec = Exec::Parallel);

/// Functions annihilated by every P_k: e.(v_1 x v_2) and, for N >= 4,
/// (v_1 - v_2).(v_3 - v_4).
TrialFunction null_space_example(int n, int variant);

/// f minus its least-squares projection onto span{eta_iota(v_j)} (Monte Carlo
/// Gram-Schmidt against the sum forms).
TrialFunction project_out_sum_forms(const TrialFunction& f, const BasisPtr& basis, std::int64_t n_samples,
                                    Seed seed);

void write_matrix_csv(const Eigen::MatrixXd& m, std::ostream& out);

} // namespace kac
