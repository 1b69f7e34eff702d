#include "nehari/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nehari/error.hpp"

namespace nehari {

std::vector<double> Tridiagonal::apply(std::span<const double> x) const
{
    const std::size_t n = size();
    if (x.size() != n)
        throw Error(ErrorKind::Dimension, "tridiagonal apply: size mismatch");
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = diag[i] * x[i];
        if (i > 0)
            s += sub[i - 1] * x[i - 1];
        if (i + 1 < n)
            s += sup[i] * x[i + 1];
        y[i] = s;
    }
    return y;
}

std::vector<double> Tridiagonal::apply_transpose(std::span<const double> x) const
{
    const std::size_t n = size();
    if (x.size() != n)
        throw Error(ErrorKind::Dimension, "tridiagonal apply: size mismatch");
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = diag[i] * x[i];
        if (i > 0)
            s += sup[i - 1] * x[i - 1];
        if (i + 1 < n)
            s += sub[i] * x[i + 1];
        y[i] = s;
    }
    return y;
}

double Tridiagonal::norm_inf() const
{
    const std::size_t n = size();
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = std::abs(diag[i]);
        if (i > 0)
            s += std::abs(sub[i - 1]);
        if (i + 1 < n)
            s += std::abs(sup[i]);
        r = std::max(r, s);
    }
    return r;
}

TridiagonalLU::TridiagonalLU(const Tridiagonal& a)
    : n_(a.size()), l_(n_ ? n_ - 1 : 0), u0_(a.diag), u1_(a.sup), u2_(n_ > 2 ? n_ - 2 : 0, 0.0),
      swapped_(n_ ? n_ - 1 : 0, 0)
{
    if (n_ == 0)
        throw Error(ErrorKind::Dimension, "empty tridiagonal matrix");
    std::vector<double> dl = a.sub;
    u1_.resize(n_ - 1);
    for (std::size_t i = 0; i + 1 < n_; ++i) {
        if (std::abs(u0_[i]) >= std::abs(dl[i])) {
            const double m = u0_[i] != 0.0 ? dl[i] / u0_[i] : 0.0;
            l_[i] = m;
            u0_[i + 1] -= m * u1_[i];
        }
        else {
            // Interchange rows i and i+1.
            const double m = u0_[i] / dl[i];
            l_[i] = m;
            swapped_[i] = 1;
            u0_[i] = dl[i];
            const double tmp = u1_[i];
            u1_[i] = u0_[i + 1];
            u0_[i + 1] = tmp - m * u0_[i + 1];
            if (i + 2 < n_) {
                u2_[i] = u1_[i + 1];
                u1_[i + 1] = -m * u2_[i];
            }
        }
    }
    const double scale = std::max(a.norm_inf(), std::numeric_limits<double>::min());
    min_pivot_ = std::numeric_limits<double>::infinity();
    for (double p : u0_)
        min_pivot_ = std::min(min_pivot_, std::abs(p) / scale);
}

std::vector<double> TridiagonalLU::solve(std::span<const double> rhs) const
{
    if (rhs.size() != n_)
        throw Error(ErrorKind::Dimension, "tridiagonal solve: size mismatch");
    std::vector<double> x(rhs.begin(), rhs.end());
    for (std::size_t i = 0; i + 1 < n_; ++i) {
        if (swapped_[i]) {
            const double t = x[i];
            x[i] = x[i + 1];
            x[i + 1] = t - l_[i] * x[i + 1];
        }
        else {
            x[i + 1] -= l_[i] * x[i];
        }
    }
    for (std::size_t k = n_; k-- > 0;) {
        double s = x[k];
        if (k + 1 < n_)
            s -= u1_[k] * x[k + 1];
        if (k + 2 < n_)
            s -= u2_[k] * x[k + 2];
        if (u0_[k] == 0.0)
            throw Error(ErrorKind::Singular, "exactly singular tridiagonal matrix");
        x[k] = s / u0_[k];
    }
    return x;
}

std::vector<double> TridiagonalLU::solve_transpose(std::span<const double> rhs) const
{
    if (rhs.size() != n_)
        throw Error(ErrorKind::Dimension, "tridiagonal solve: size mismatch");
    // A = P L U  =>  A^T = U^T L^T P^T
    std::vector<double> x(rhs.begin(), rhs.end());
    for (std::size_t k = 0; k < n_; ++k) {
        double s = x[k];
        if (k >= 1)
            s -= u1_[k - 1] * x[k - 1];
        if (k >= 2)
            s -= u2_[k - 2] * x[k - 2];
        if (u0_[k] == 0.0)
            throw Error(ErrorKind::Singular, "exactly singular tridiagonal matrix");
        x[k] = s / u0_[k];
    }
    for (std::size_t i = n_ - 1; i-- > 0;) {
        if (swapped_[i]) {
            // Forward step was [x_i, x_{i+1}] <- [x_{i+1}, x_i - m x_{i+1}].
            const double a = x[i], b = x[i + 1];
            x[i] = b;
            x[i + 1] = a - l_[i] * b;
        }
        else {
            x[i] -= l_[i] * x[i + 1];
        }
    }
    return x;
}

int TridiagonalLU::det_sign() const
{
    int s = 1;
    for (std::size_t i = 0; i < n_; ++i) {
        if (u0_[i] == 0.0)
            return 0;
        if (u0_[i] < 0.0)
            s = -s;
    }
    for (char sw : swapped_) {
        if (sw)
            s = -s;
    }
    return s;
}

DetSign det_sign(const Tridiagonal& a, double zero_tol)
{
    const std::size_t n = a.size();
    if (n == 0)
        throw Error(ErrorKind::Dimension, "empty tridiagonal matrix");

    double prev = 1.0;          // f_{k-2}, scaled
    double cur = a.diag[0];     // f_{k-1}, scaled
    double log_abs = 0.0;
    auto rescale = [&]() {
        const double m = std::max(std::abs(cur), std::abs(prev));
        if (m > 0.0 && (m > 1e100 || m < 1e-100)) {
            log_abs += std::log(m);
            cur /= m;
            prev /= m;
        }
    };
    for (std::size_t k = 1; k < n; ++k) {
        const double next = a.diag[k] * cur - a.sub[k - 1] * a.sup[k - 1] * prev;
        prev = cur;
        cur = next;
        rescale();
    }

    DetSign out;
    out.sign = cur > 0.0 ? 1 : (cur < 0.0 ? -1 : 0);
    out.log_abs = cur != 0.0 ? log_abs + std::log(std::abs(cur)) : -std::numeric_limits<double>::infinity();

    if (out.sign != 0) {
        // Relative smallest singular value via inverse iteration on A^T A.
        TridiagonalLU lu(a);
        if (lu.min_relative_pivot() == 0.0) {
            out.sign = 0;
            return out;
        }
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i)
            v[i] = 1.0 + 0.5 * std::sin(1.0 + 3.0 * static_cast<double>(i));
        double growth = 0.0;
        for (int it = 0; it < 3; ++it) {
            double nv = 0.0;
            for (double e : v)
                nv += e * e;
            nv = std::sqrt(nv);
            for (auto& e : v)
                e /= nv;
            auto w = lu.solve_transpose(lu.solve(v));
            double nw = 0.0;
            for (double e : w)
                nw += e * e;
            growth = std::sqrt(nw);
            v = std::move(w);
        }
        // growth ~ 1 / sigma_min^2
        const double sigma_min = 1.0 / std::sqrt(growth);
        if (sigma_min < zero_tol * a.norm_inf())
            out.sign = 0;
    }
    return out;
}

std::size_t eigenvalues_below(const Tridiagonal& a, double shift)
{
    const std::size_t n = a.size();
    const double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
    std::size_t count = 0;
    double q = a.diag[0] - shift;
    if (q == 0.0)
        q = -tiny;
    if (q < 0.0)
        ++count;
    for (std::size_t k = 1; k < n; ++k) {
        q = (a.diag[k] - shift) - a.sub[k - 1] * a.sup[k - 1] / q;
        if (q == 0.0)
            q = -tiny;
        if (q < 0.0)
            ++count;
    }
    return count;
}

}  // namespace nehari
