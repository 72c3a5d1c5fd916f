#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "kac/basis.hpp"
#include "kac/core.hpp"
#include "kac/rng.hpp"

namespace kac {

using BasisPtr = std::shared_ptr<const SingleParticleBasis>;

/// A function on S_{N,1,0}: either sum_j phi_j(v_j) with phi_j expanded in a
/// SingleParticleBasis (N x M coefficient matrix), or an opaque evaluator.
class TrialFunction {
  public:
    using Evaluator = std::function<double(std::span<const Vec3>)>;

    static TrialFunction sum_form(BasisPtr basis, Eigen::MatrixXd coeffs, std::string name = "sum");
    static TrialFunction opaque(int n, Evaluator f, std::string name = "opaque", bool mean_zero = false);

    bool is_sum_form() const { return basis_ != nullptr; }
    int n() const { return n_; }
    const std::string& name() const { return name_; }
    /// Sum form: every phi_j is orthogonal to constants. Opaque: as declared.
    bool mean_zero() const;

    double operator()(std::span<const Vec3> v) const;
    double operator()(const ParticleState& s) const { return (*this)(s.view()); }

    const BasisPtr& basis() const { return basis_; }
    const Eigen::MatrixXd& coeffs() const;
    /// phi_j(v) for a sum form.
    double phi(int j, const Vec3& v) const;

  private:
    int n_ = 0;
    std::string name_;
    BasisPtr basis_;
    Eigen::MatrixXd coeffs_;
    Evaluator eval_;
    bool declared_mean_zero_ = false;
};

/// Pointwise sum; stays a sum form when both are sum forms over the same basis.
TrialFunction operator+(const TrialFunction& a, const TrialFunction& b);
TrialFunction scaled(const TrialFunction& f, double c);

/// eta_iota(v_j).
TrialFunction single_particle(BasisPtr basis, int j, int iota);
/// sum_j eta_iota(v_j).
TrialFunction symmetric_sum(BasisPtr basis, int iota);
/// Random sum form with phi_j orthogonal to constants; coefficients N(0,1)
/// on iota = 1..M-1.
TrialFunction random_sum_form(BasisPtr basis, Rng& rng);

/// Mean-zero family used by the variational gap estimators: single-particle
/// eta_iota(v_1) and symmetric sums sum_j eta_iota(v_j) for basis members of
/// total polynomial degree l + 2p <= max_degree (symmetric sums only for
/// iota >= 5, since sum_j eta_iota(v_j) vanishes identically for iota = 1..4).
std::vector<TrialFunction> default_trial_family(BasisPtr basis, int max_degree = 4);

/// Evaluates a list of trial functions with shared basis work. Sum forms over
/// one basis are stored row-sparse, so a pair update costs only the nonzeros
/// of the two rows involved.
class FamilyEvaluator {
  public:
    explicit FamilyEvaluator(std::vector<TrialFunction> family);

    int size() const { return static_cast<int>(family_.size()); }
    int n() const { return n_; }
    const TrialFunction& member(int k) const { return family_.at(static_cast<std::size_t>(k)); }

    /// out[k] = f_k(v).
    void eval(std::span<const Vec3> v, double* out) const;

    /// out[k] = f_k(v) - f_k(v') where v' equals v except v'_i = a, v'_j = b.
    /// `scratch` is reused between calls.
    void pair_delta(std::span<const Vec3> v, int i, int j, const Vec3& a, const Vec3& b, double* out,
                    std::vector<Vec3>& scratch) const;

  private:
    struct Entry {
        int iota;
        double c;
    };
    std::vector<TrialFunction> family_;
    int n_ = 0;
    BasisPtr basis_; // shared basis of the sum-form members, if any
    // rows_[k][j]: nonzero coefficients of member k on particle j
    std::vector<std::vector<std::vector<Entry>>> rows_;
    std::vector<char> sum_form_;
};

} // namespace kac
