#include "kac/basis.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

#include "kac/sampling.hpp"

namespace kac {

namespace {

// m = 1, -1, 2, -2, ..., 0 so that l = 1 gives x, y, z
int m_rank(int l, int m)
{
    if (m == 0) {
        return 2 * l;
    }
    return m > 0 ? 2 * (m - 1) : 2 * (-m - 1) + 1;
}

double factorial_ratio(int l, int m)
{
    // (l - m)! / (l + m)!
    double r = 1.0;
    for (int i = l - m + 1; i <= l + m; ++i) {
        r /= i;
    }
    return r;
}

} // namespace

double legendre(int l, double t)
{
    if (l == 0) {
        return 1.0;
    }
    double p0 = 1.0;
    double p1 = t;
    for (int k = 2; k <= l; ++k) {
        const double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

double solid_harmonic(int l, int m, const Vec3& v)
{
    if (l < 0 || m < -l || m > l) {
        throw std::invalid_argument("solid_harmonic: need |m| <= l");
    }
    const double s3 = std::sqrt(3.0);
    const double s15 = std::sqrt(15.0);
    switch (l) {
    case 0:
        return 1.0;
    case 1:
        return s3 * (m == 1 ? v.x : (m == -1 ? v.y : v.z));
    case 2:
        switch (m) {
        case 0:
            return 0.5 * std::sqrt(5.0) * (3.0 * v.z * v.z - norm2(v));
        case 1:
            return s15 * v.x * v.z;
        case -1:
            return s15 * v.y * v.z;
        case 2:
            return 0.5 * s15 * (v.x * v.x - v.y * v.y);
        default:
            return s15 * v.x * v.y;
        }
    default:
        break;
    }
    const double r = norm(v);
    if (r == 0.0) {
        return 0.0;
    }
    const double ct = std::clamp(v.z / r, -1.0, 1.0);
    const double phi = std::atan2(v.y, v.x);
    const int am = std::abs(m);
    const double plm = std::assoc_legendre(static_cast<unsigned>(l), static_cast<unsigned>(am), ct);
    const double rl = std::pow(r, l);
    if (m == 0) {
        return std::sqrt(2.0 * l + 1.0) * plm * rl;
    }
    const double c = std::sqrt(2.0 * (2.0 * l + 1.0) * factorial_ratio(l, am));
    return c * plm * rl * (m > 0 ? std::cos(am * phi) : std::sin(am * phi));
}

SingleParticleBasis::SingleParticleBasis(int n, int radial_deg, int angular_deg)
    : n_(n), radial_deg_(n == 2 ? 0 : radial_deg), angular_deg_(angular_deg)
{
    if (n < 2 || radial_deg < 0 || angular_deg < 0) {
        throw std::invalid_argument("SingleParticleBasis: need N >= 2 and non-negative degrees");
    }
    using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    const int np = radial_deg_ + 1;
    coef_.resize(static_cast<std::size_t>(angular_deg_ + 1));
    for (int l = 0; l <= angular_deg_; ++l) {
        MatL g(np, np);
        for (int p = 0; p < np; ++p) {
            for (int q = 0; q < np; ++q) {
                g(p, q) = exact_marginal_moment(n, p + q + l);
            }
        }
        Eigen::LLT<MatL> llt(g);
        if (llt.info() != Eigen::Success) {
            throw std::runtime_error("SingleParticleBasis: moment matrix not positive definite");
        }
        const MatL lower = llt.matrixL();
        const MatL c = lower.triangularView<Eigen::Lower>().solve(MatL::Identity(np, np));
        coef_[l].assign(static_cast<std::size_t>(np), std::vector<double>(static_cast<std::size_t>(np), 0.0));
        for (int p = 0; p < np; ++p) {
            for (int q = 0; q <= p; ++q) {
                coef_[l][p][q] = static_cast<double>(c(p, q));
            }
        }
    }
    for (int l = 0; l <= angular_deg_; ++l) {
        for (int p = 0; p < np; ++p) {
            for (int m = -l; m <= l; ++m) {
                members_.push_back({l, m, p});
            }
        }
    }
    std::stable_sort(members_.begin(), members_.end(), [](const BasisMember& a, const BasisMember& b) {
        return std::make_tuple(a.l + 2 * a.p, a.l, m_rank(a.l, a.m)) <
               std::make_tuple(b.l + 2 * b.p, b.l, m_rank(b.l, b.m));
    });
}

int SingleParticleBasis::index_of(int l, int m, int p) const
{
    for (int i = 0; i < size(); ++i) {
        const auto& b = members_[static_cast<std::size_t>(i)];
        if (b.l == l && b.m == m && b.p == p) {
            return i;
        }
    }
    return -1;
}

void SingleParticleBasis::radial(int l, double s, double* out) const
{
    const auto& c = coef_.at(static_cast<std::size_t>(l));
    for (int p = 0; p <= radial_deg_; ++p) {
        double acc = 0.0;
        for (int q = p; q >= 0; --q) {
            acc = acc * s + c[p][q];
        }
        out[p] = acc;
    }
}

void SingleParticleBasis::eval(const Vec3& v, double* out) const
{
    const double s = norm2(v);
    double rad[3][16];
    double harm[3][5];
    const bool fast = angular_deg_ <= 2 && radial_deg_ < 16;
    if (fast) {
        for (int l = 0; l <= angular_deg_; ++l) {
            radial(l, s, rad[l]);
            for (int m = -l; m <= l; ++m) {
                harm[l][m + l] = solid_harmonic(l, m, v);
            }
        }
    }
    for (int i = 0; i < size(); ++i) {
        const auto& b = members_[static_cast<std::size_t>(i)];
        out[i] = fast ? rad[b.l][b.p] * harm[b.l][b.m + b.l] : eval_one(i, v);
    }
}

std::vector<double> SingleParticleBasis::eval(const Vec3& v) const
{
    std::vector<double> out(static_cast<std::size_t>(size()));
    eval(v, out.data());
    return out;
}

double SingleParticleBasis::eval_one(int iota, const Vec3& v) const
{
    const auto& b = member(iota);
    std::vector<double> rad(static_cast<std::size_t>(radial_deg_ + 1));
    radial(b.l, norm2(v), rad.data());
    return rad[static_cast<std::size_t>(b.p)] * solid_harmonic(b.l, b.m, v);
}

double SingleParticleBasis::c_n() const
{
    if (radial_deg_ < 1) {
        throw std::logic_error("SingleParticleBasis::c_n: no |v|^2 member for this basis");
    }
    return coef_[0][1][1];
}

} // namespace kac
