#include "nehari/corrector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "nehari/error.hpp"

namespace nehari {

const char* to_string(NewtonStatus s) noexcept
{
    switch (s) {
    case NewtonStatus::Converged: return "converged";
    case NewtonStatus::MaxIterations: return "max-iterations";
    case NewtonStatus::Diverged: return "diverged";
    case NewtonStatus::Singular: return "singular";
    }
    return "unknown";
}

double norm2(std::span<const double> v)
{
    double s = 0.0;
    for (double e : v)
        s += e * e;
    return std::sqrt(s);
}

double Tangent::dot(const Tangent& o) const
{
    double s = dlambda * o.dlambda;
    for (std::size_t i = 0; i < du.size(); ++i)
        s += du[i] * o.du[i];
    return s;
}

double Tangent::norm() const
{
    return std::sqrt(dot(*this));
}

void Tangent::normalize()
{
    const double n = norm();
    if (!(n > 0.0))
        throw Error(ErrorKind::Singular, "cannot normalize a zero tangent");
    for (auto& e : du)
        e /= n;
    dlambda /= n;
}

Tangent Tangent::operator-() const
{
    Tangent t{du, -dlambda};
    for (auto& e : t.du)
        e = -e;
    return t;
}

NewtonResult newton_fixed_lambda(const Discretization& d, double lambda, Profile u0,
                                 const NewtonOptions& opt)
{
    if (!(opt.tol > 0.0) || opt.max_iters < 1)
        throw Error(ErrorKind::Config, "newton needs tol > 0 and max_iters >= 1");
    d.check_size(u0);

    NewtonResult res;
    res.state = {lambda, std::move(u0)};
    auto& u = res.state.u;

    auto r = d.residual(lambda, u);
    double rn = norm2(r);
    const double r0 = std::max(rn, std::numeric_limits<double>::min());
    for (int it = 0;; ++it) {
        res.residual_norm = rn;
        res.iterations = it;
        if (rn < opt.tol) {
            res.status = NewtonStatus::Converged;
            return res;
        }
        if (!std::isfinite(rn) || rn > opt.divergence_factor * r0) {
            res.status = NewtonStatus::Diverged;
            return res;
        }
        if (it == opt.max_iters) {
            res.status = NewtonStatus::MaxIterations;
            return res;
        }
        TridiagonalLU lu(d.jacobian(lambda, u));
        if (lu.singular(opt.singular_pivot)) {
            res.status = NewtonStatus::Singular;
            return res;
        }
        const auto delta = lu.solve(r);
        for (std::size_t i = 0; i < u.size(); ++i)
            u[i] -= delta[i];
        res.increments.push_back(norm2(delta));
        r = d.residual(lambda, u);
        rn = norm2(r);
    }
}

std::vector<double> augmented_residual(const Discretization& d, const AugmentedState& y,
                                       const AugmentedState& y_prev, const Tangent& t, double ds)
{
    const std::size_t n = d.size();
    if (y.u.size() != n || y_prev.u.size() != n || t.du.size() != n)
        throw Error(ErrorKind::Dimension, "augmented residual: inconsistent dimensions");
    auto g = d.residual(y.lambda, y.u);
    double c = t.dlambda * (y.lambda - y_prev.lambda) - ds;
    for (std::size_t i = 0; i < n; ++i)
        c += t.du[i] * (y.u[i] - y_prev.u[i]);
    g.push_back(c);
    return g;
}

namespace {

// Pivoted Gaussian elimination of the bordered matrix
//   [ J       b ]
//   [ c^T     d ]
// exploiting that, at column k, only three rows can be nonzero: two pending
// rows carried over from earlier steps and the untouched band row k+1.
// Rows are stored densely from their first nonzero column up to N-1, with the
// border column kept separately.
class BorderedElimination {
public:
    struct Row {
        std::size_t start = 0;
        std::vector<double> v;  // columns [start, start + v.size())
        double border = 0.0;
        double rhs = 0.0;

        double at(std::size_t col) const
        {
            return (col >= start && col < start + v.size()) ? v[col - start] : 0.0;
        }
    };

    BorderedElimination(const BandedJacobian& j, std::span<const double> b, const Tangent& t,
                        std::span<const double> rhs)
        : j_(j), b_(b), rhs_(rhs), n_(j.size())
    {
        scale_ = std::max(j.norm_inf(), 1.0);
        Row s;
        s.start = 0;
        s.v.assign(t.du.begin(), t.du.end());
        s.border = t.dlambda;
        s.rhs = rhs.empty() ? 0.0 : rhs[n_];
        pending_[0] = band_row(0);
        pending_[1] = std::move(s);
        eliminate();
    }

    int det_sign() const { return det_sign_; }
    double min_pivot() const { return min_pivot_; }

    std::vector<double> back_substitute() const
    {
        std::vector<double> x(n_ + 1, 0.0);
        x[n_] = last_rhs_ / last_pivot_;
        for (std::size_t k = n_; k-- > 0;) {
            const Row& r = u_rows_[k];
            double s = r.rhs - r.border * x[n_];
            for (std::size_t c = k + 1; c < r.start + r.v.size(); ++c)
                s -= r.v[c - r.start] * x[c];
            x[k] = s / r.v[0];
        }
        return x;
    }

private:
    Row band_row(std::size_t i) const
    {
        Row r;
        r.start = i > 0 ? i - 1 : 0;
        if (i > 0)
            r.v.push_back(j_.sub[i - 1]);
        r.v.push_back(j_.diag[i]);
        if (i + 1 < n_)
            r.v.push_back(j_.sup[i]);
        r.border = b_[i];
        r.rhs = rhs_.empty() ? 0.0 : rhs_[i];
        return r;
    }

    // r <- r - m p, both rows starting at column `col`, after which r starts at col+1.
    static void eliminate_row(Row& r, const Row& p, std::size_t col)
    {
        const double m = r.at(col) / p.at(col);
        const std::size_t end = std::max(r.start + r.v.size(), p.start + p.v.size());
        std::vector<double> nv(end > col + 1 ? end - col - 1 : 0, 0.0);
        for (std::size_t c = col + 1; c < end; ++c)
            nv[c - col - 1] = r.at(c) - m * p.at(c);
        r.start = col + 1;
        r.v = std::move(nv);
        r.border -= m * p.border;
        r.rhs -= m * p.rhs;
    }

    static void drop_leading(Row& r, std::size_t col)
    {
        // Row with a zero in column `col`: re-base it at col+1.
        if (r.start > col)
            return;
        const std::size_t end = r.start + r.v.size();
        std::vector<double> nv(end > col + 1 ? end - col - 1 : 0, 0.0);
        for (std::size_t c = col + 1; c < end; ++c)
            nv[c - col - 1] = r.at(c);
        r.start = col + 1;
        r.v = std::move(nv);
    }

    void eliminate()
    {
        u_rows_.reserve(n_);
        min_pivot_ = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < n_; ++k) {
            std::vector<Row*> cand{&pending_[0], &pending_[1]};
            Row incoming;
            if (k + 1 < n_) {
                incoming = band_row(k + 1);
                cand.push_back(&incoming);
            }
            std::size_t best = 0;
            for (std::size_t c = 1; c < cand.size(); ++c) {
                if (std::abs(cand[c]->at(k)) > std::abs(cand[best]->at(k)))
                    best = c;
            }
            const double piv = cand[best]->at(k);
            min_pivot_ = std::min(min_pivot_, std::abs(piv) / scale_);
            if (piv == 0.0) {
                det_sign_ = 0;
                throw Error(ErrorKind::Singular, "bordered matrix is singular");
            }
            // Permutation parity: the pivot row moves to slot k. Rows are
            // ordered (pending0, pending1, incoming) as slots (k, N, k+1).
            // Track parity by counting the transposition needed.
            if (best != 0)
                det_sign_ = -det_sign_;
            if (piv < 0.0)
                det_sign_ = -det_sign_;

            Row pivot = std::move(*cand[best]);
            std::vector<Row> rest;
            for (std::size_t c = 0; c < cand.size(); ++c) {
                if (c == best)
                    continue;
                Row r = std::move(*cand[c]);
                if (r.at(k) != 0.0)
                    eliminate_row(r, pivot, k);
                else
                    drop_leading(r, k);
                rest.push_back(std::move(r));
            }
            // Keep the previous slot semantics: pending_[0] is the row that will
            // occupy slot k+1, pending_[1] the row currently at slot N.
            if (rest.size() == 2) {
                // Before elimination the slot order was (k: cand0, N: cand1, k+1: cand2).
                // After moving the pivot to k, restore (k+1, N) for the survivors.
                if (best == 0) {
                    // slots: k+1 <- incoming, N <- pending1 : rest = {pending1, incoming}
                    pending_[0] = std::move(rest[1]);
                    pending_[1] = std::move(rest[0]);
                }
                else if (best == 1) {
                    // pending1 (slot N) swapped into k; pending0 goes to N.
                    // rest = {pending0, incoming}
                    pending_[0] = std::move(rest[1]);
                    pending_[1] = std::move(rest[0]);
                }
                else {
                    // incoming (slot k+1) swapped with pending0 (slot k).
                    // rest = {pending0, pending1}
                    pending_[0] = std::move(rest[0]);
                    pending_[1] = std::move(rest[1]);
                }
            }
            else {
                pending_[1] = std::move(rest[0]);
            }
            u_rows_.push_back(std::move(pivot));
        }
        last_pivot_ = pending_[1].border;
        last_rhs_ = pending_[1].rhs;
        min_pivot_ = std::min(min_pivot_, std::abs(last_pivot_) / scale_);
        if (last_pivot_ == 0.0) {
            det_sign_ = 0;
            throw Error(ErrorKind::Singular, "bordered matrix is singular");
        }
        if (last_pivot_ < 0.0)
            det_sign_ = -det_sign_;
    }

    const BandedJacobian& j_;
    std::span<const double> b_;
    std::span<const double> rhs_;
    std::size_t n_;
    double scale_ = 1.0;
    Row pending_[2];
    std::vector<Row> u_rows_;
    double last_pivot_ = 0.0;
    double last_rhs_ = 0.0;
    double min_pivot_ = 0.0;
    int det_sign_ = 1;
};

constexpr double kBorderPivotTol = 1e-12;
constexpr double kSingularTol = 1e-14;

void check_bordered_dims(const BandedJacobian& j, std::span<const double> b_col, const Tangent& t)
{
    const std::size_t n = j.size();
    if (b_col.size() != n || t.du.size() != n)
        throw Error(ErrorKind::Dimension, "bordered system: inconsistent dimensions");
}

}  // namespace

BorderedSolution bordered_solve(const BandedJacobian& j, std::span<const double> b_col,
                                const Tangent& t, std::span<const double> rhs)
{
    check_bordered_dims(j, b_col, t);
    const std::size_t n = j.size();
    if (rhs.size() != n + 1)
        throw Error(ErrorKind::Dimension, "bordered system: rhs must have length N+1");

    BorderedSolution out;
    TridiagonalLU lu(j);
    if (!lu.singular(kBorderPivotTol)) {
        const auto z1 = lu.solve(rhs.first(n));
        const auto z2 = lu.solve(b_col);
        double tz1 = 0.0, tz2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            tz1 += t.du[i] * z1[i];
            tz2 += t.du[i] * z2[i];
        }
        const double schur = t.dlambda - tz2;
        const double schur_scale = std::abs(t.dlambda) + norm2(t.du) * norm2(z2);
        out.schur = schur;
        if (std::abs(schur) > kBorderPivotTol * schur_scale) {
            const double xl = (rhs[n] - tz1) / schur;
            out.x.resize(n + 1);
            for (std::size_t i = 0; i < n; ++i)
                out.x[i] = z1[i] - xl * z2[i];
            out.x[n] = xl;
            return out;
        }
    }

    BorderedElimination el(j, b_col, t, rhs);
    if (el.min_pivot() < kSingularTol)
        throw Error(ErrorKind::Singular, "bordered matrix is numerically singular");
    out.x = el.back_substitute();
    out.fallback = true;
    return out;
}

int bordered_det_sign(const BandedJacobian& j, std::span<const double> b_col, const Tangent& t)
{
    check_bordered_dims(j, b_col, t);
    TridiagonalLU lu(j);
    if (!lu.singular(kBorderPivotTol)) {
        // det [[J, b], [c, d]] = det(J) (d - c J^{-1} b)
        const auto z = lu.solve(b_col);
        double cz = 0.0;
        for (std::size_t i = 0; i < z.size(); ++i)
            cz += t.du[i] * z[i];
        const double schur = t.dlambda - cz;
        const double scale = std::abs(t.dlambda) + norm2(t.du) * norm2(z);
        if (std::abs(schur) > kBorderPivotTol * scale)
            return lu.det_sign() * (schur > 0.0 ? 1 : -1);
    }
    try {
        BorderedElimination el(j, b_col, t, {});
        return el.det_sign();
    }
    catch (const Error&) {
        return 0;
    }
}

NewtonResult newton_augmented(const Discretization& d, AugmentedState guess,
                              const AugmentedState& y_prev, const Tangent& t, double ds,
                              const NewtonOptions& opt)
{
    const std::size_t n = d.size();
    NewtonResult res;
    res.state = std::move(guess);
    auto& y = res.state;

    auto g = augmented_residual(d, y, y_prev, t, ds);
    double gn = norm2(g);
    const double g0 = std::max(gn, std::numeric_limits<double>::min());
    for (int it = 0;; ++it) {
        res.residual_norm = gn;
        res.iterations = it;
        if (gn < opt.tol) {
            res.status = NewtonStatus::Converged;
            return res;
        }
        if (!std::isfinite(gn) || gn > opt.divergence_factor * g0) {
            res.status = NewtonStatus::Diverged;
            return res;
        }
        if (it == opt.max_iters) {
            res.status = NewtonStatus::MaxIterations;
            return res;
        }
        const auto jac = d.jacobian(y.lambda, y.u);
        std::vector<double> b(n);
        for (std::size_t i = 0; i < n; ++i)
            b[i] = -y.u[i];
        BorderedSolution step;
        try {
            step = bordered_solve(jac, b, t, g);
        }
        catch (const Error& e) {
            if (e.kind() != ErrorKind::Singular)
                throw;
            res.status = NewtonStatus::Singular;
            return res;
        }
        for (std::size_t i = 0; i < n; ++i)
            y.u[i] -= step.x[i];
        y.lambda -= step.x[n];
        res.increments.push_back(norm2(step.x));
        g = augmented_residual(d, y, y_prev, t, ds);
        gn = norm2(g);
    }
}

}  // namespace nehari
