#include "nehari/discretize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nehari/error.hpp"

namespace nehari {

namespace {

double sample_weight(const Weight& w, double x)
{
    constexpr double snap_tol = 1e-14;
    for (const auto& iv : w.intervals()) {
        if (std::abs(x - iv.left) <= snap_tol || std::abs(x - iv.right) <= snap_tol)
            return 1.0;
    }
    return w(x);
}

}  // namespace

Discretization::Discretization(Weight w, Mesh m)
    : weight_(std::move(w)), mesh_(std::move(m))
{
    const std::size_t n = mesh_.interior();
    const auto& nodes = mesh_.nodes();
    x_.resize(n);
    a_.resize(n);
    lo_.resize(n);
    mid_.resize(n);
    hi_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = nodes[i + 1];
        const double hl = xi - nodes[i];
        const double hr = nodes[i + 2] - xi;
        x_[i] = xi;
        a_[i] = sample_weight(weight_, xi);
        lo_[i] = 2.0 / (hl * (hl + hr));
        mid_[i] = -2.0 / (hl * hr);
        hi_[i] = 2.0 / (hr * (hl + hr));
    }
}

void Discretization::check_size(std::span<const double> u) const
{
    if (u.size() != size())
        throw Error(ErrorKind::MeshMismatch, "profile length " + std::to_string(u.size()) +
                                                 " does not match " + std::to_string(size()) +
                                                 " interior nodes");
}

std::vector<double> Discretization::residual(double lambda, std::span<const double> u) const
{
    check_size(u);
    const std::size_t n = size();
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double ul = i > 0 ? u[i - 1] : 0.0;
        const double ur = i + 1 < n ? u[i + 1] : 0.0;
        const double lap = lo_[i] * ul + mid_[i] * u[i] + hi_[i] * ur;
        r[i] = -lap - lambda * u[i] - a_[i] * u[i] * u[i] * u[i];
    }
    return r;
}

BandedJacobian Discretization::jacobian(double lambda, std::span<const double> u) const
{
    check_size(u);
    BandedJacobian j = laplacian();
    for (std::size_t i = 0; i < size(); ++i)
        j.diag[i] -= lambda + 3.0 * a_[i] * u[i] * u[i];
    return j;
}

BandedJacobian Discretization::laplacian() const
{
    const std::size_t n = size();
    BandedJacobian j(n);
    for (std::size_t i = 0; i < n; ++i) {
        j.diag[i] = -mid_[i];
        if (i > 0)
            j.sub[i - 1] = -lo_[i];
        if (i + 1 < n)
            j.sup[i] = -hi_[i];
    }
    return j;
}

double Discretization::l2_norm(std::span<const double> u) const
{
    check_size(u);
    const auto& nodes = mesh_.nodes();
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        s += (nodes[i + 1] - nodes[i]) * u[i] * u[i];
    return std::sqrt(s);
}

double Discretization::principal_eigenvalue() const
{
    const auto lap = laplacian();
    double lo = 0.0, hi = lap.norm_inf();
    while (hi - lo > 1e-14 * hi) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi)
            break;
        if (eigenvalues_below(lap, mid) >= 1)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

Profile Discretization::reflect(std::span<const double> u)
{
    return Profile(u.rbegin(), u.rend());
}

std::vector<double> residual(const Weight& w, const Mesh& m, double lambda, std::span<const double> u)
{
    return Discretization(w, m).residual(lambda, u);
}

BandedJacobian jacobian(const Weight& w, const Mesh& m, double lambda, std::span<const double> u)
{
    return Discretization(w, m).jacobian(lambda, u);
}

double discrete_l2_norm(const Mesh& m, std::span<const double> u)
{
    if (u.size() != m.interior())
        throw Error(ErrorKind::MeshMismatch, "profile length does not match mesh");
    const auto& nodes = m.nodes();
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        s += (nodes[i + 1] - nodes[i]) * u[i] * u[i];
    return std::sqrt(s);
}

double toeplitz_eigenvalue(std::size_t n, std::size_t k)
{
    if (n < 1 || k < 1 || k > n)
        throw Error(ErrorKind::Index, "eigenvalue index must satisfy 1 <= k <= n");
    const double np1 = static_cast<double>(n + 1);
    return 2.0 * np1 * np1 *
           (1.0 + std::cos(static_cast<double>(n + 1 - k) / np1 * std::numbers::pi));
}

}  // namespace nehari
