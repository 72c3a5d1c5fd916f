#include "kac/trial.hpp"

#include <random>
#include <stdexcept>

namespace kac {

TrialFunction TrialFunction::sum_form(BasisPtr basis, Eigen::MatrixXd coeffs, std::string name)
{
    if (!basis) {
        throw std::invalid_argument("sum_form: null basis");
    }
    if (coeffs.rows() != basis->n() || coeffs.cols() != basis->size()) {
        throw std::invalid_argument("sum_form: coefficient matrix must be N x basis size");
    }
    if (!coeffs.allFinite()) {
        throw std::invalid_argument("sum_form: non-finite coefficient");
    }
    TrialFunction f;
    f.n_ = basis->n();
    f.name_ = std::move(name);
    f.basis_ = std::move(basis);
    f.coeffs_ = std::move(coeffs);
    return f;
}

TrialFunction TrialFunction::opaque(int n, Evaluator fn, std::string name, bool mean_zero)
{
    if (!fn) {
        throw std::invalid_argument("opaque: empty evaluator");
    }
    TrialFunction f;
    f.n_ = n;
    f.name_ = std::move(name);
    f.eval_ = std::move(fn);
    f.declared_mean_zero_ = mean_zero;
    return f;
}

bool TrialFunction::mean_zero() const
{
    if (!is_sum_form()) {
        return declared_mean_zero_;
    }
    return coeffs_.col(0).isZero(0.0);
}

double TrialFunction::operator()(std::span<const Vec3> v) const
{
    if (!is_sum_form()) {
        return eval_(v);
    }
    const int m = basis_->size();
    std::vector<double> b(static_cast<std::size_t>(m));
    double acc = 0.0;
    for (int j = 0; j < n_; ++j) {
        basis_->eval(v[j], b.data());
        acc += coeffs_.row(j).dot(Eigen::Map<const Eigen::RowVectorXd>(b.data(), m));
    }
    return acc;
}

const Eigen::MatrixXd& TrialFunction::coeffs() const
{
    if (!is_sum_form()) {
        throw std::logic_error("coeffs: trial function '" + name_ + "' is opaque");
    }
    return coeffs_;
}

double TrialFunction::phi(int j, const Vec3& v) const
{
    const auto b = basis_->eval(v);
    return coeffs().row(j).dot(Eigen::Map<const Eigen::RowVectorXd>(b.data(), basis_->size()));
}

TrialFunction operator+(const TrialFunction& a, const TrialFunction& b)
{
    if (a.n() != b.n()) {
        throw std::invalid_argument("trial function sum: particle counts differ");
    }
    const std::string name = a.name() + "+" + b.name();
    if (a.is_sum_form() && b.is_sum_form() && a.basis() == b.basis()) {
        return TrialFunction::sum_form(a.basis(), a.coeffs() + b.coeffs(), name);
    }
    return TrialFunction::opaque(
        a.n(), [a, b](std::span<const Vec3> v) { return a(v) + b(v); }, name, a.mean_zero() && b.mean_zero());
}

TrialFunction scaled(const TrialFunction& f, double c)
{
    if (f.is_sum_form()) {
        return TrialFunction::sum_form(f.basis(), c * f.coeffs(), f.name());
    }
    return TrialFunction::opaque(
        f.n(), [f, c](std::span<const Vec3> v) { return c * f(v); }, f.name(), f.mean_zero());
}

TrialFunction single_particle(BasisPtr basis, int j, int iota)
{
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(basis->n(), basis->size());
    c(j, iota) = 1.0;
    return TrialFunction::sum_form(basis, std::move(c),
                                   "eta" + std::to_string(iota) + "(v" + std::to_string(j + 1) + ")");
}

TrialFunction symmetric_sum(BasisPtr basis, int iota)
{
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(basis->n(), basis->size());
    c.col(iota).setOnes();
    return TrialFunction::sum_form(basis, std::move(c), "sum_eta" + std::to_string(iota));
}

TrialFunction random_sum_form(BasisPtr basis, Rng& rng)
{
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(basis->n(), basis->size());
    for (int j = 0; j < c.rows(); ++j) {
        for (int i = 1; i < c.cols(); ++i) {
            c(j, i) = g(rng);
        }
    }
    return TrialFunction::sum_form(std::move(basis), std::move(c), "random");
}

std::vector<TrialFunction> default_trial_family(BasisPtr basis, int max_degree)
{
    std::vector<TrialFunction> out;
    for (int i = 1; i < basis->size(); ++i) {
        const auto& m = basis->member(i);
        if (m.l + 2 * m.p <= max_degree) {
            out.push_back(single_particle(basis, 0, i));
        }
    }
    if (basis->n() > 2) {
        for (int i = 5; i < basis->size(); ++i) {
            const auto& m = basis->member(i);
            if (m.l + 2 * m.p <= max_degree) {
                out.push_back(symmetric_sum(basis, i));
            }
        }
    }
    return out;
}

FamilyEvaluator::FamilyEvaluator(std::vector<TrialFunction> family) : family_(std::move(family))
{
    if (family_.empty()) {
        throw std::invalid_argument("FamilyEvaluator: empty family");
    }
    n_ = family_.front().n();
    rows_.resize(family_.size());
    sum_form_.assign(family_.size(), 0);
    for (std::size_t k = 0; k < family_.size(); ++k) {
        const auto& f = family_[k];
        if (f.n() != n_) {
            throw std::invalid_argument("FamilyEvaluator: members disagree on N");
        }
        if (!f.is_sum_form()) {
            continue;
        }
        if (basis_ && basis_ != f.basis()) {
            continue; // evaluated as opaque
        }
        basis_ = f.basis();
        sum_form_[k] = 1;
        rows_[k].resize(static_cast<std::size_t>(n_));
        const auto& c = f.coeffs();
        for (int j = 0; j < n_; ++j) {
            for (int i = 0; i < c.cols(); ++i) {
                if (c(j, i) != 0.0) {
                    rows_[k][j].push_back({i, c(j, i)});
                }
            }
        }
    }
}

void FamilyEvaluator::eval(std::span<const Vec3> v, double* out) const
{
    const int kf = size();
    std::vector<double> bvals;
    if (basis_) {
        const int m = basis_->size();
        bvals.resize(static_cast<std::size_t>(n_ * m));
        for (int j = 0; j < n_; ++j) {
            basis_->eval(v[j], bvals.data() + j * m);
        }
    }
    for (int k = 0; k < kf; ++k) {
        if (!sum_form_[k]) {
            out[k] = family_[k](v);
            continue;
        }
        const int m = basis_->size();
        double acc = 0.0;
        for (int j = 0; j < n_; ++j) {
            for (const auto& e : rows_[k][j]) {
                acc += e.c * bvals[static_cast<std::size_t>(j * m + e.iota)];
            }
        }
        out[k] = acc;
    }
}

void FamilyEvaluator::pair_delta(std::span<const Vec3> v, int i, int j, const Vec3& a, const Vec3& b,
                                 double* out, std::vector<Vec3>& scratch) const
{
    const int kf = size();
    double bi[64], bj[64], ba[64], bb[64];
    std::vector<double> big;
    double *pi = bi, *pj = bj, *pa = ba, *pb = bb;
    if (basis_) {
        const int m = basis_->size();
        if (m > 64) {
            big.resize(static_cast<std::size_t>(4 * m));
            pi = big.data();
            pj = pi + m;
            pa = pj + m;
            pb = pa + m;
        }
        basis_->eval(v[i], pi);
        basis_->eval(v[j], pj);
        basis_->eval(a, pa);
        basis_->eval(b, pb);
    }
    bool opaque_ready = false;
    for (int k = 0; k < kf; ++k) {
        if (sum_form_[k]) {
            double acc = 0.0;
            for (const auto& e : rows_[k][i]) {
                acc += e.c * (pi[e.iota] - pa[e.iota]);
            }
            for (const auto& e : rows_[k][j]) {
                acc += e.c * (pj[e.iota] - pb[e.iota]);
            }
            out[k] = acc;
            continue;
        }
        if (!opaque_ready) {
            scratch.assign(v.begin(), v.end());
            scratch[i] = a;
            scratch[j] = b;
            opaque_ready = true;
        }
        out[k] = family_[k](v) - family_[k](scratch);
    }
}

} // namespace kac
