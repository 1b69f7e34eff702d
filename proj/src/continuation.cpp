#include "nehari/continuation.hpp"

#include <algorithm>
#include <cmath>

#include "nehari/error.hpp"

namespace nehari {

const char* to_string(PointTag t) noexcept
{
    switch (t) {
    case PointTag::Regular: return "regular";
    case PointTag::Fold: return "fold";
    case PointTag::Bifurcation: return "bifurcation";
    case PointTag::BranchStart: return "branch_start";
    }
    return "unknown";
}

const char* to_string(BranchSymmetry s) noexcept
{
    switch (s) {
    case BranchSymmetry::Symmetric: return "symmetric";
    case BranchSymmetry::AsymmetricLeft: return "asymmetric_left";
    case BranchSymmetry::AsymmetricRight: return "asymmetric_right";
    case BranchSymmetry::Unknown: return "unknown";
    }
    return "unknown";
}

const char* to_string(EventKind k) noexcept
{
    switch (k) {
    case EventKind::Pitchfork: return "pitchfork";
    case EventKind::Fold: return "fold";
    case EventKind::Unclassified: return "unclassified";
    }
    return "unknown";
}

const char* to_string(StopReason r) noexcept
{
    switch (r) {
    case StopReason::None: return "none";
    case StopReason::LambdaMin: return "lambda_min";
    case StopReason::LambdaMax: return "lambda_max";
    case StopReason::NormMax: return "norm_max";
    case StopReason::MaxSteps: return "max_steps";
    case StopReason::Stall: return "stall";
    case StopReason::JoinedBranch: return "joined_branch";
    case StopReason::ClosedLoop: return "closed_loop";
    case StopReason::PositivityLost: return "positivity_lost";
    case StopReason::NonexistenceBound: return "nonexistence_bound";
    }
    return "unknown";
}

void ContinuationConfig::validate() const
{
    if (!(ds > 0.0) || !(ds_min > 0.0) || ds_min > ds)
        throw Error(ErrorKind::Config, "need 0 < ds_min <= ds");
    if (!(lambda_min < 9.869604401089358))
        throw Error(ErrorKind::Config, "lambda_min must lie below pi^2");
    if (!(lambda_max > lambda_min))
        throw Error(ErrorKind::Config, "lambda_max must exceed lambda_min");
    if (max_steps < 1 || grow_after < 1)
        throw Error(ErrorKind::Config, "max_steps and grow_after must be positive");
    if (!(newton.tol > 0.0) || newton.max_iters < 1)
        throw Error(ErrorKind::Config, "newton tolerance and iteration cap must be positive");
}

SolutionPoint make_point(const Discretization& d, double lambda, Profile u, PointTag tag)
{
    SolutionPoint p;
    p.lambda = lambda;
    p.l2norm = d.l2_norm(u);
    p.u = std::move(u);
    p.tag = tag;
    return p;
}

double asymmetry(std::span<const double> u)
{
    double diff = 0.0, top = 0.0;
    const std::size_t n = u.size();
    for (std::size_t i = 0; i < n; ++i) {
        diff = std::max(diff, std::abs(u[i] - u[n - 1 - i]));
        top = std::max(top, std::abs(u[i]));
    }
    return top > 0.0 ? diff / top : 0.0;
}

namespace {

std::vector<double> minus_u(std::span<const double> u)
{
    std::vector<double> b(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        b[i] = -u[i];
    return b;
}

std::vector<double> unit_last(std::size_t n)
{
    std::vector<double> e(n + 1, 0.0);
    e[n] = 1.0;
    return e;
}

Tangent normalized(const std::vector<double>& z)
{
    const std::size_t n = z.size() - 1;
    Tangent t{std::vector<double>(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(n)), z[n]};
    t.normalize();
    return t;
}

// Approximate null vector of J by inverse iteration.
std::vector<double> approximate_null_vector(const BandedJacobian& j)
{
    const std::size_t n = j.size();
    BandedJacobian shifted = j;
    const double nudge = 1e-13 * std::max(j.norm_inf(), 1.0);
    for (auto& e : shifted.diag)
        e += nudge;
    TridiagonalLU lu(shifted);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = 1.0 + 0.3 * std::sin(1.0 + 3.0 * static_cast<double>(i));
    for (int it = 0; it < 4; ++it) {
        v = lu.solve(v);
        const double nv = norm2(v);
        for (auto& e : v)
            e /= nv;
    }
    return v;
}

Tangent raw_tangent(const Discretization& d, const AugmentedState& y)
{
    const auto j = d.jacobian(y.lambda, y.u);
    const auto b = minus_u(y.u);
    const std::size_t n = y.u.size();
    try {
        Tangent row{std::vector<double>(n, 0.0), 1.0};
        return normalized(bordered_solve(j, b, row, unit_last(n)).x);
    }
    catch (const Error& e) {
        if (e.kind() != ErrorKind::Singular)
            throw;
    }
    try {
        Tangent row{approximate_null_vector(j), 0.0};
        return normalized(bordered_solve(j, b, row, unit_last(n)).x);
    }
    catch (const Error& e) {
        if (e.kind() != ErrorKind::Singular)
            throw;
    }
    throw Error(ErrorKind::RankDeficient,
                "null space of [J | F_lambda] is not one-dimensional at lambda = " +
                    std::to_string(y.lambda));
}

double point_to_segment(const AugmentedState& p, const AugmentedState& a, const AugmentedState& b)
{
    // Euclidean distance in (u, lambda) from p to the chord [a, b].
    double ab2 = (b.lambda - a.lambda) * (b.lambda - a.lambda);
    double ap_ab = (p.lambda - a.lambda) * (b.lambda - a.lambda);
    for (std::size_t i = 0; i < p.u.size(); ++i) {
        const double e = b.u[i] - a.u[i];
        ab2 += e * e;
        ap_ab += (p.u[i] - a.u[i]) * e;
    }
    const double s = ab2 > 0.0 ? std::clamp(ap_ab / ab2, 0.0, 1.0) : 0.0;
    double dist2 = 0.0;
    const double dl = p.lambda - (a.lambda + s * (b.lambda - a.lambda));
    dist2 += dl * dl;
    for (std::size_t i = 0; i < p.u.size(); ++i) {
        const double e = p.u[i] - (a.u[i] + s * (b.u[i] - a.u[i]));
        dist2 += e * e;
    }
    return std::sqrt(dist2);
}

double distance(const AugmentedState& a, const AugmentedState& b)
{
    double s = (a.lambda - b.lambda) * (a.lambda - b.lambda);
    for (std::size_t i = 0; i < a.u.size(); ++i)
        s += (a.u[i] - b.u[i]) * (a.u[i] - b.u[i]);
    return std::sqrt(s);
}

}  // namespace

Tangent initial_tangent(const Discretization& d, const AugmentedState& y, int direction_hint)
{
    Tangent t = raw_tangent(d, y);
    bool flip = false;
    if (std::abs(t.dlambda) > 1e-10) {
        flip = direction_hint != 0 && t.dlambda * direction_hint < 0.0;
    }
    else {
        for (double e : t.du) {
            if (e != 0.0) {
                flip = e < 0.0;
                break;
            }
        }
    }
    return flip ? -t : t;
}

Tangent initial_tangent(const Discretization& d, const AugmentedState& y, const Tangent& reference)
{
    Tangent t = raw_tangent(d, y);
    return t.dot(reference) < 0.0 ? -t : t;
}

std::pair<Tangent, int> next_tangent(const Discretization& d, const AugmentedState& y,
                                     const Tangent& previous)
{
    const auto j = d.jacobian(y.lambda, y.u);
    const auto b = minus_u(y.u);
    const auto sol = bordered_solve(j, b, previous, unit_last(y.u.size()));
    // z . previous = 1 > 0, so the orientation carries over.
    return {normalized(sol.x), bordered_det_sign(j, b, previous)};
}

Branch continue_branch(const Discretization& d, const SolutionPoint& start, const Tangent& t0,
                       const ContinuationConfig& cfg)
{
    cfg.validate();
    d.check_size(start.u);
    if (t0.du.size() != start.u.size())
        throw Error(ErrorKind::Dimension, "tangent does not match the start point");
    const double lambda_bound = d.principal_eigenvalue();

    Branch br;
    AugmentedState y{start.lambda, start.u};
    Tangent t = t0;
    t.normalize();
    {
        SolutionPoint p = start;
        p.tag = PointTag::BranchStart;
        p.l2norm = d.l2_norm(p.u);
        br.points.push_back(std::move(p));
        const auto j = d.jacobian(y.lambda, y.u);
        br.det_j.push_back(TridiagonalLU(j).det_sign());
        br.det_aug.push_back(bordered_det_sign(j, minus_u(y.u), t));
        br.tangents.push_back(t);
    }
    const AugmentedState origin = y;
    const Tangent origin_tangent = t;

    double ds = cfg.ds;
    double travelled = 0.0;
    int successes = 0;
    while (br.steps < cfg.max_steps) {
        AugmentedState pred{y.lambda + ds * t.dlambda, y.u};
        for (std::size_t i = 0; i < pred.u.size(); ++i)
            pred.u[i] += ds * t.du[i];

        auto res = newton_augmented(d, pred, y, t, ds, cfg.newton);
        bool ok = res.converged() && distance(res.state, pred) <= ds;
        std::pair<Tangent, int> next;
        if (ok) {
            try {
                next = next_tangent(d, res.state, t);
            }
            catch (const Error& e) {
                if (e.kind() != ErrorKind::Singular)
                    throw;
                ok = false;
            }
        }
        if (!ok) {
            ++br.rejected;
            successes = 0;
            ds *= 0.5;
            if (ds < cfg.ds_min) {
                br.stop = StopReason::Stall;
                br.diagnostic = "step size fell below ds_min near lambda = " + std::to_string(y.lambda) +
                                " (last corrector status: " + to_string(res.status) + ")";
                break;
            }
            continue;
        }

        const auto& u = res.state.u;
        const double umin = *std::min_element(u.begin(), u.end());
        if (umin < -cfg.positivity_tol) {
            br.stop = StopReason::PositivityLost;
            br.diagnostic = "solution left the positive cone near lambda = " + std::to_string(res.state.lambda);
            break;
        }
        if (res.state.lambda >= lambda_bound) {
            br.stop = StopReason::NonexistenceBound;
            br.diagnostic = "reached the principal eigenvalue of the discrete operator";
            break;
        }
        if (res.state.lambda > cfg.lambda_max) {
            br.stop = StopReason::LambdaMax;
            break;
        }

        const AugmentedState prev = y;
        y = std::move(res.state);
        t = next.first;
        travelled += distance(prev, y);
        ++br.steps;
        br.points.push_back(make_point(d, y.lambda, y.u));
        br.tangents.push_back(t);
        br.det_j.push_back(TridiagonalLU(d.jacobian(y.lambda, y.u)).det_sign());
        br.det_aug.push_back(next.second);

        if (y.lambda < cfg.lambda_min) {
            br.stop = StopReason::LambdaMin;
            break;
        }
        if (br.points.back().l2norm > cfg.norm_max) {
            br.stop = StopReason::NormMax;
            break;
        }
        if (travelled > 4.0 * cfg.ds && br.points.size() > 3 && t.dot(origin_tangent) > 0.0 &&
            point_to_segment(origin, prev, y) < 0.25 * ds) {
            br.stop = StopReason::ClosedLoop;
            break;
        }
        if (++successes >= cfg.grow_after && ds < cfg.ds) {
            ds = std::min(2.0 * ds, cfg.ds);
            successes = 0;
        }
    }
    if (br.stop == StopReason::None)
        br.stop = StopReason::MaxSteps;

    for (const auto& [k, lam] : fold_points(br))
        br.points[k].tag = PointTag::Fold;
    br.symmetry = classify_symmetry(d, br);
    return br;
}

std::vector<std::pair<std::size_t, double>> fold_points(const Branch& b)
{
    std::vector<std::pair<std::size_t, double>> out;
    const auto& p = b.points;
    if (p.size() < 3)
        return out;
    std::vector<double> s(p.size(), 0.0);
    for (std::size_t k = 1; k < p.size(); ++k) {
        double d2 = (p[k].lambda - p[k - 1].lambda) * (p[k].lambda - p[k - 1].lambda);
        for (std::size_t i = 0; i < p[k].u.size(); ++i)
            d2 += (p[k].u[i] - p[k - 1].u[i]) * (p[k].u[i] - p[k - 1].u[i]);
        s[k] = s[k - 1] + std::sqrt(d2);
    }
    for (std::size_t k = 1; k + 1 < p.size(); ++k) {
        const double a = p[k].lambda - p[k - 1].lambda;
        const double c = p[k + 1].lambda - p[k].lambda;
        if (!(a * c < 0.0))
            continue;
        // Quadratic through (s, lambda) at k-1, k, k+1 in Newton form.
        const double s0 = s[k - 1], s1 = s[k], s2 = s[k + 1];
        const double l0 = p[k - 1].lambda, l1 = p[k].lambda, l2 = p[k + 1].lambda;
        const double d01 = (l1 - l0) / (s1 - s0);
        const double d12 = (l2 - l1) / (s2 - s1);
        const double c2 = (d12 - d01) / (s2 - s0);
        double lam = l1;
        if (c2 != 0.0) {
            // lambda(s) = l0 + d01 (s - s0) + c2 (s - s0)(s - s1)
            const double sv = 0.5 * (s0 + s1) - d01 / (2.0 * c2);
            if (sv >= s0 && sv <= s2)
                lam = l0 + d01 * (sv - s0) + c2 * (sv - s0) * (sv - s1);
        }
        out.emplace_back(k, lam);
    }
    return out;
}

BranchSymmetry classify_symmetry(const Discretization& d, const Branch& b)
{
    if (b.points.empty())
        return BranchSymmetry::Unknown;
    const auto& u = b.points[b.points.size() / 2].u;
    if (asymmetry(u) < 1e-6)
        return BranchSymmetry::Symmetric;
    const auto& x = d.x();
    double left = 0.0, right = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
        (x[i] < 0.5 ? left : right) += u[i];
    if (left == right)
        return BranchSymmetry::Unknown;
    return left > right ? BranchSymmetry::AsymmetricLeft : BranchSymmetry::AsymmetricRight;
}

}  // namespace nehari
