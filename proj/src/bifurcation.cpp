#include "nehari/bifurcation.hpp"

#include <algorithm>
#include <cmath>

#include "nehari/error.hpp"

namespace nehari {

namespace {

std::vector<double> minus_u(std::span<const double> u)
{
    std::vector<double> b(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        b[i] = -u[i];
    return b;
}

double max_abs(std::span<const double> v)
{
    double m = 0.0;
    for (double e : v)
        m = std::max(m, std::abs(e));
    return m;
}

double max_diff(std::span<const double> a, std::span<const double> b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

double bisect_linear_eigenvalue(const Discretization& d, double lo, double hi, double width_tol)
{
    const auto lap = d.laplacian();
    auto sign_at = [&](double lambda) {
        auto a = lap;
        for (auto& e : a.diag)
            e -= lambda;
        return det_sign(a, 0.0).sign;
    };
    const int s_lo = sign_at(lo);
    if (s_lo == sign_at(hi))
        throw Error(ErrorKind::BracketInvalid, "determinant has the same sign at both ends");
    while (hi - lo > width_tol) {
        const double mid = 0.5 * (lo + hi);
        if (sign_at(mid) == s_lo)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

SignChanges scan_sign_changes(const Branch& b)
{
    SignChanges out;
    for (std::size_t k = 0; k + 1 < b.points.size(); ++k) {
        const bool aug = b.det_aug[k] * b.det_aug[k + 1] < 0;
        const bool fix = b.det_j[k] * b.det_j[k + 1] < 0;
        if (aug)
            out.bifurcations.push_back(k);
        else if (fix)
            out.folds.push_back(k);
    }
    return out;
}

std::vector<double> null_vector(const BandedJacobian& j, bool transpose)
{
    const std::size_t n = j.size();
    BandedJacobian shifted = j;
    const double nudge = 1e-14 * std::max(j.norm_inf(), 1.0);
    for (auto& e : shifted.diag)
        e += nudge;
    TridiagonalLU lu(shifted);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = 1.0 + 0.3 * std::sin(1.0 + 3.0 * static_cast<double>(i));
    for (int it = 0; it < 6; ++it) {
        v = transpose ? lu.solve_transpose(v) : lu.solve(v);
        const double nv = norm2(v);
        for (auto& e : v)
            e /= nv;
    }
    // Fix the sign so that the largest component is positive.
    std::size_t arg = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (std::abs(v[i]) > std::abs(v[arg]))
            arg = i;
    }
    if (v[arg] < 0.0) {
        for (auto& e : v)
            e = -e;
    }
    return v;
}

BifurcationEvent locate_bifurcation(const Discretization& d, const Branch& b,
                                    std::pair<std::size_t, std::size_t> bracket,
                                    const LocateOptions& opt, bool use_fixed_jacobian)
{
    const auto [k, k1] = bracket;
    if (k1 != k + 1 || k1 >= b.points.size())
        throw Error(ErrorKind::BracketInvalid, "bracket must be two consecutive stored points");
    const auto& signs = use_fixed_jacobian ? b.det_j : b.det_aug;
    if (signs[k] * signs[k1] >= 0)
        throw Error(ErrorKind::BracketInvalid, "determinant sign does not change across the bracket");

    const AugmentedState yk{b.points[k].lambda, b.points[k].u};
    const Tangent& tk = b.tangents[k];
    const auto sign_at = [&](const AugmentedState& y) {
        const auto j = d.jacobian(y.lambda, y.u);
        return use_fixed_jacobian ? TridiagonalLU(j).det_sign() : bordered_det_sign(j, minus_u(y.u), tk);
    };

    AugmentedState lo_state = yk;
    AugmentedState hi_state{b.points[k1].lambda, b.points[k1].u};
    double lo = 0.0;
    double hi = tk.dlambda * (hi_state.lambda - yk.lambda);
    for (std::size_t i = 0; i < yk.u.size(); ++i)
        hi += tk.du[i] * (hi_state.u[i] - yk.u[i]);
    const int s_lo = signs[k];

    auto solve_at = [&](double sigma, const AugmentedState& a, const AugmentedState& c, double sa, double sc) {
        const double w = sc != sa ? (sigma - sa) / (sc - sa) : 0.5;
        AugmentedState guess{a.lambda + w * (c.lambda - a.lambda), a.u};
        for (std::size_t i = 0; i < guess.u.size(); ++i)
            guess.u[i] += w * (c.u[i] - a.u[i]);
        auto r = newton_augmented(d, guess, yk, tk, sigma, opt.newton);
        if (!r.converged())
            throw Error(ErrorKind::CorrectorFailure,
                        std::string("corrector failed during bisection (") + to_string(r.status) + ")");
        return r.state;
    };

    for (int it = 0; it < opt.max_bisections; ++it) {
        if (std::abs(hi_state.lambda - lo_state.lambda) < opt.tol)
            break;
        if (hi - lo <= 1e-14 * std::abs(hi))
            break;
        const double mid = 0.5 * (lo + hi);
        auto y = solve_at(mid, lo_state, hi_state, lo, hi);
        if (sign_at(y) == s_lo) {
            lo = mid;
            lo_state = std::move(y);
        }
        else {
            hi = mid;
            hi_state = std::move(y);
        }
    }
    const double mid = 0.5 * (lo + hi);
    const auto y = solve_at(mid, lo_state, hi_state, lo, hi);

    BifurcationEvent ev;
    ev.lambda_b = y.lambda;
    ev.u = y.u;
    ev.branch_index = k;
    ev.arclength = mid;
    const auto j = d.jacobian(y.lambda, y.u);
    ev.null_vector = null_vector(j);
    {
        const auto jv = j.apply(ev.null_vector);
        ev.sigma_min_rel = norm2(jv) / std::max(j.norm_inf(), 1e-300);
    }
    {
        const auto psi = null_vector(j, true);
        double pu = 0.0;
        for (std::size_t i = 0; i < psi.size(); ++i)
            pu += psi[i] * y.u[i];
        const double nu = norm2(y.u);
        ev.fold_indicator = nu > 0.0 ? std::abs(pu) / nu : 0.0;
    }
    if (use_fixed_jacobian) {
        ev.kind = ev.fold_indicator > 1e-3 ? EventKind::Fold : EventKind::Unclassified;
    }
    else {
        const auto& v = ev.null_vector;
        const std::size_t n = v.size();
        double anti = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            anti = std::max(anti, std::abs(v[i] + v[n - 1 - i]));
        const bool host_symmetric = asymmetry(y.u) < 1e-6;
        ev.kind = (host_symmetric && anti < 1e-6) ? EventKind::Pitchfork : EventKind::Unclassified;
    }
    return ev;
}

std::pair<NewtonResult, NewtonResult> correct_predictors(const Discretization& d,
                                                         const BifurcationEvent& ev,
                                                         const SolutionPoint& host, double amp,
                                                         const NewtonOptions& opt)
{
    d.check_size(host.u);
    if (ev.null_vector.size() != host.u.size())
        throw Error(ErrorKind::Dimension, "null vector does not match the host point");
    const double lambda = ev.lambda_b - amp / 10.0;
    Profile up = host.u, um = host.u;
    for (std::size_t i = 0; i < up.size(); ++i) {
        up[i] += amp * ev.null_vector[i];
        um[i] -= amp * ev.null_vector[i];
    }
    return {newton_fixed_lambda(d, lambda, std::move(up), opt),
            newton_fixed_lambda(d, lambda, std::move(um), opt)};
}

SwitchResult switch_branch(const Discretization& d, const BifurcationEvent& ev,
                           const SolutionPoint& host, const SwitchOptions& opt)
{
    const double base = opt.amplitude ? *opt.amplitude : 0.01 * (1.0 + d.l2_norm(host.u));
    if (!(base >= 0.0))
        throw Error(ErrorKind::Config, "switching amplitude must be non-negative");

    double amp = base;
    for (int attempt = 0; attempt <= opt.max_doublings; ++attempt, amp *= 2.0) {
        if (amp == 0.0)
            break;
        auto [rp, rm] = correct_predictors(d, ev, host, amp, opt.newton);
        if (!rp.converged() || !rm.converged())
            continue;
        // A predictor that fell back onto the host keeps no component along v.
        const auto ref = newton_fixed_lambda(d, ev.lambda_b - amp / 10.0, host.u, opt.newton);
        const Profile& base_u = ref.converged() ? ref.state.u : host.u;
        auto along_v = [&](const Profile& u) {
            double s = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i)
                s += ev.null_vector[i] * (u[i] - base_u[i]);
            return std::abs(s);
        };
        if (along_v(rp.state.u) < 0.1 * amp || along_v(rm.state.u) < 0.1 * amp)
            continue;
        if (max_diff(rp.state.u, rm.state.u) < 1e-6 * std::max(max_abs(host.u), 1.0))
            continue;
        return {std::move(rp.state), std::move(rm.state), amp, false};
    }

    // Hyperplane-constrained correction: fix the component along the null
    // vector and let lambda float.
    const double amp_fb = base > 0.0 ? base : 0.01 * (1.0 + d.l2_norm(host.u));
    const AugmentedState at_b{ev.lambda_b, host.u};
    const Tangent row{ev.null_vector, 0.0};
    SwitchResult out;
    out.used_fallback = true;
    out.amplitude = amp_fb;
    for (int sgn : {1, -1}) {
        AugmentedState guess = at_b;
        for (std::size_t i = 0; i < guess.u.size(); ++i)
            guess.u[i] += sgn * amp_fb * ev.null_vector[i];
        auto r = newton_augmented(d, guess, at_b, row, sgn * amp_fb, opt.newton);
        if (!r.converged())
            throw Error(ErrorKind::CorrectorFailure,
                        "branch switching failed at lambda = " + std::to_string(ev.lambda_b));
        (sgn > 0 ? out.plus : out.minus) = std::move(r.state);
    }
    return out;
}

}  // namespace nehari
