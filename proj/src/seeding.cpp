#include "nehari/seeding.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <thread>

#include "nehari/error.hpp"
#include "nehari/tridiagonal.hpp"

namespace nehari {

PeakMask PeakMask::from_string(const std::string& s)
{
    if (s.empty())
        throw Error(ErrorKind::MaskMismatch, "empty peak mask");
    PeakMask m;
    for (char c : s) {
        if (c != '0' && c != '1')
            throw Error(ErrorKind::MaskMismatch, "peak mask must be a string of 0 and 1: " + s);
        m.bits.push_back(c == '1');
    }
    if (m.count() == 0)
        throw Error(ErrorKind::MaskMismatch, "the all-zero mask is the trivial solution");
    return m;
}

std::string PeakMask::to_string() const
{
    std::string s;
    for (bool b : bits)
        s.push_back(b ? '1' : '0');
    return s;
}

PeakMask PeakMask::reflected() const
{
    return PeakMask{std::vector<bool>(bits.rbegin(), bits.rend())};
}

std::size_t PeakMask::count() const
{
    return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), true));
}

std::vector<PeakMask> enumerate_masks(int kappa)
{
    if (kappa < 1 || kappa > 20)
        throw Error(ErrorKind::Domain, "kappa out of range for mask enumeration");
    const unsigned width = static_cast<unsigned>(kappa) + 1;
    std::vector<PeakMask> out;
    for (unsigned long v = 1; v < (1UL << width); ++v) {
        PeakMask m;
        for (unsigned j = 0; j < width; ++j)
            m.bits.push_back(((v >> j) & 1UL) != 0);
        out.push_back(std::move(m));
    }
    return out;
}

Profile sine_seed(const Mesh& m, double amplitude)
{
    Profile u;
    u.reserve(m.interior());
    for (double x : m.interior_nodes())
        u.push_back(amplitude * std::sin(std::numbers::pi * x));
    return u;
}

double sine_amplitude(const Discretization& d, double lambda)
{
    const double l1 = d.principal_eigenvalue();
    if (!(lambda < l1))
        throw Error(ErrorKind::Domain, "no positive solution at or above the principal eigenvalue");
    double s2 = 0.0, s4 = 0.0;
    const auto& a = d.nodal_weight();
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double p = std::sin(std::numbers::pi * d.x()[i]);
        s2 += p * p;
        s4 += a[i] * p * p * p * p;
    }
    if (!(s4 > 0.0))
        throw Error(ErrorKind::Domain, "weight vanishes on the whole mesh");
    return std::sqrt((l1 - lambda) * s2 / s4);
}

std::vector<Interval> support_intervals(const Weight& w)
{
    std::vector<Interval> out;
    double left = 0.0;
    for (const auto& iv : w.intervals()) {
        out.push_back({left, iv.left});
        left = iv.right;
    }
    out.push_back({left, 1.0});
    return out;
}

namespace {

void add_bump(Profile& u, const Mesh& m, const Interval& iv, double amplitude, double rate, double c,
              bool truncate = true)
{
    const auto& x = m.nodes();
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double xi = x[i + 1];
        if (truncate && (xi < iv.left || xi > iv.right))
            continue;
        u[i] += amplitude / std::cosh(rate * (xi - c));
    }
}

double bump_center(const Interval& iv, double lambda, PeakPlacement placement, double edge_offset)
{
    const double c = iv.center();
    const double offset = edge_offset / std::sqrt(-lambda);
    if (placement == PeakPlacement::Center || iv.right - iv.left <= 2.0 * offset)
        return c;
    const bool left_is_edge = iv.left > 0.0;
    const bool right_is_edge = iv.right < 1.0;
    if (left_is_edge == right_is_edge && std::abs(c - 0.5) < 1e-12)
        return c;
    // Edge of a well, preferring the side facing x = 0.5 for Inward.
    bool use_left;
    if (!left_is_edge)
        use_left = false;
    else if (!right_is_edge)
        use_left = true;
    else
        use_left = (c > 0.5) == (placement == PeakPlacement::Inward);
    return use_left ? iv.left + offset : iv.right - offset;
}

double log_sum_exp(const std::vector<double>& v)
{
    double top = -std::numeric_limits<double>::infinity();
    for (double x : v)
        top = std::max(top, x);
    if (!std::isfinite(top))
        return top;
    double s = 0.0;
    for (double x : v)
        s += std::exp(x - top);
    return top + std::log(s);
}

// Leading-order tail interactions of sech peaks of rate r: a Dirichlet wall
// at distance d pushes with exp(-2 r d), a well edge of depth 1 - eps at
// distance d with (1 - eps) exp(-4 r d), and a neighbouring peak at distance
// d pulls with exp(-r d). Each peak is moved to the zero of its net force
// inside its own interval, sweeping until the positions settle.
std::vector<double> balanced_centers(const std::vector<Interval>& ivs, double eps, double lambda)
{
    const double r = std::sqrt(-lambda);
    const double log_edge = eps < 1.0 ? std::log(1.0 - eps) : -std::numeric_limits<double>::infinity();
    std::vector<double> p;
    for (const auto& iv : ivs)
        p.push_back(iv.center());
    const std::size_t n = p.size();
    auto net = [&](std::size_t j, double x) {
        std::vector<double> right{-2.0 * r * x}, left{-2.0 * r * (1.0 - x)};
        if (ivs[j].left > 0.0)
            right.push_back(log_edge - 4.0 * r * (x - ivs[j].left));
        if (ivs[j].right < 1.0)
            left.push_back(log_edge - 4.0 * r * (ivs[j].right - x));
        if (j + 1 < n)
            right.push_back(-r * (p[j + 1] - x));
        if (j > 0)
            left.push_back(-r * (x - p[j - 1]));
        return log_sum_exp(right) - log_sum_exp(left);
    };
    // Mirror-image interval sets keep mirror-image centers; the sweep alone
    // drifts off that equilibrium, since neighbouring peaks attract.
    bool mirrored = true;
    for (std::size_t j = 0; j < n; ++j)
        mirrored = mirrored && std::abs(ivs[j].left + ivs[n - 1 - j].right - 1.0) < 1e-12;
    for (int sweep = 0; sweep < 100; ++sweep) {
        double moved = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            double lo = ivs[j].left, hi = ivs[j].right;
            if (!(net(j, lo) > 0.0) || !(net(j, hi) < 0.0))
                continue;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                (net(j, mid) > 0.0 ? lo : hi) = mid;
            }
            if (mirrored && 2 * j + 1 == n)
                lo = hi = 0.5;
            moved = std::max(moved, std::abs(0.5 * (lo + hi) - p[j]));
            p[j] = 0.5 * (lo + hi);
        }
        if (mirrored)
            for (std::size_t j = 0; j < n / 2; ++j) {
                p[j] = 0.5 * (p[j] + 1.0 - p[n - 1 - j]);
                p[n - 1 - j] = 1.0 - p[j];
            }
        if (moved < 1e-12)
            break;
    }
    return p;
}

std::vector<double> centers_for(const Weight& w, const std::vector<Interval>& support, const PeakMask& mask,
                                double lambda, PeakPlacement placement, double edge_offset)
{
    std::vector<Interval> active;
    for (std::size_t j = 0; j < support.size(); ++j) {
        if (mask.bits[j])
            active.push_back(support[j]);
    }
    if (placement == PeakPlacement::Balanced)
        return balanced_centers(active, w.eps(), lambda);
    std::vector<double> c;
    for (const auto& iv : active)
        c.push_back(bump_center(iv, lambda, placement, edge_offset));
    return c;
}

std::vector<Interval> checked_support(const Weight& w, const PeakMask& mask, double lambda)
{
    if (!(lambda < 0.0))
        throw Error(ErrorKind::Domain, "peak seeds need lambda < 0");
    auto support = support_intervals(w);
    if (mask.bits.size() != support.size())
        throw Error(ErrorKind::MaskMismatch, "mask has " + std::to_string(mask.bits.size()) +
                                                 " bits but the weight has " +
                                                 std::to_string(support.size()) + " support intervals");
    if (mask.count() == 0)
        throw Error(ErrorKind::MaskMismatch, "the all-zero mask is the trivial solution");
    return support;
}

// Solves the small dense system a x = b in place (partial pivoting).
bool dense_solve(std::vector<std::vector<double>> a, std::vector<double>& b)
{
    const std::size_t n = b.size();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        for (std::size_t i = k + 1; i < n; ++i) {
            if (std::abs(a[i][k]) > std::abs(a[p][k]))
                p = i;
        }
        if (a[p][k] == 0.0)
            return false;
        std::swap(a[p], a[k]);
        std::swap(b[p], b[k]);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = a[i][k] / a[k][k];
            for (std::size_t j = k; j < n; ++j)
                a[i][j] -= f * a[k][j];
            b[i] -= f * b[k];
        }
    }
    for (std::size_t k = n; k-- > 0;) {
        for (std::size_t j = k + 1; j < n; ++j)
            b[k] -= a[k][j] * b[j];
        b[k] /= a[k][k];
    }
    return true;
}

}  // namespace

Profile peak_pattern_seed(const Weight& w, const Mesh& m, const PeakMask& mask, double lambda,
                          PeakPlacement placement, double edge_offset)
{
    const auto support = checked_support(w, mask, lambda);
    const auto centers = centers_for(w, support, mask, lambda, placement, edge_offset);
    Profile u(m.interior(), 0.0);
    for (std::size_t j = 0, k = 0; j < support.size(); ++j) {
        if (mask.bits[j])
            add_bump(u, m, support[j], std::sqrt(-2.0 * lambda), std::sqrt(-lambda), centers[k++],
                     placement == PeakPlacement::Center);
    }
    return u;
}

std::vector<std::vector<double>> peak_translation_modes(const Weight& w, const Mesh& m, const PeakMask& mask,
                                                        double lambda, PeakPlacement placement,
                                                        double edge_offset)
{
    const auto support = checked_support(w, mask, lambda);
    const double r = std::sqrt(-lambda);
    const auto& x = m.nodes();
    const auto centers = centers_for(w, support, mask, lambda, placement, edge_offset);
    std::vector<std::vector<double>> modes;
    for (std::size_t j = 0, k = 0; j < support.size(); ++j) {
        if (!mask.bits[j])
            continue;
        const double c = centers[k++];
        std::vector<double> v(m.interior(), 0.0);
        for (std::size_t i = 0; i < v.size(); ++i) {
            const double xi = x[i + 1];
            if (xi < support[j].left || xi > support[j].right)
                continue;
            const double z = r * (xi - c);
            v[i] = std::tanh(z) / std::cosh(z);
        }
        const double nv = norm2(v);
        if (nv > 0.0) {
            for (double& e : v)
                e /= nv;
            modes.push_back(std::move(v));
        }
    }
    return modes;
}

NewtonResult pinned_newton(const Discretization& d, double lambda, Profile u0,
                           const std::vector<std::vector<double>>& modes, const NewtonOptions& opt,
                           int pinned_iters)
{
    d.check_size(u0);
    const std::size_t n = u0.size(), k = modes.size();
    const bool keep_symmetry = d.weight().symmetric() && asymmetry(u0) < 1e-6;
    auto symmetrize = [&](Profile& u) {
        if (!keep_symmetry)
            return;
        for (std::size_t i = 0, j = n - 1; i < j; ++i, --j)
            u[i] = u[j] = 0.5 * (u[i] + u[j]);
    };
    Profile u = std::move(u0);
    symmetrize(u);
    for (int it = 0; it < pinned_iters && k > 0; ++it) {
        const auto f = d.residual(lambda, u);
        if (!std::isfinite(norm2(f)) || norm2(f) <= opt.tol)
            break;
        TridiagonalLU lu(d.jacobian(lambda, u));
        if (lu.singular(opt.singular_pivot))
            break;
        const auto a = lu.solve(f);
        std::vector<std::vector<double>> xs;
        for (const auto& v : modes)
            xs.push_back(lu.solve(v));
        // J du + V mu = -F with V^T du = 0.
        std::vector<std::vector<double>> s(k, std::vector<double>(k, 0.0));
        std::vector<double> mu(k, 0.0);
        for (std::size_t p = 0; p < k; ++p) {
            for (std::size_t i = 0; i < n; ++i)
                mu[p] -= modes[p][i] * a[i];
            for (std::size_t q = 0; q < k; ++q) {
                for (std::size_t i = 0; i < n; ++i)
                    s[p][q] += modes[p][i] * xs[q][i];
            }
        }
        if (!dense_solve(s, mu))
            break;
        for (std::size_t i = 0; i < n; ++i) {
            double du = -a[i];
            for (std::size_t q = 0; q < k; ++q)
                du -= xs[q][i] * mu[q];
            u[i] += du;
        }
        symmetrize(u);
    }
    if (!keep_symmetry)
        return newton_fixed_lambda(d, lambda, std::move(u), opt);

    // Plain Newton restricted to symmetric profiles: rounding would otherwise
    // excite the nearly free translation modes.
    NewtonResult r;
    double r0 = 0.0;
    for (r.iterations = 0;; ++r.iterations) {
        const auto f = d.residual(lambda, u);
        r.residual_norm = norm2(f);
        if (r.iterations == 0)
            r0 = r.residual_norm;
        if (!std::isfinite(r.residual_norm) || r.residual_norm > opt.divergence_factor * r0) {
            r.status = NewtonStatus::Diverged;
            break;
        }
        if (r.residual_norm <= opt.tol) {
            r.status = NewtonStatus::Converged;
            break;
        }
        if (r.iterations >= opt.max_iters) {
            r.status = NewtonStatus::MaxIterations;
            break;
        }
        TridiagonalLU lu(d.jacobian(lambda, u));
        if (lu.singular(opt.singular_pivot)) {
            r.status = NewtonStatus::Singular;
            break;
        }
        const auto du = lu.solve(f);
        for (std::size_t i = 0; i < n; ++i)
            u[i] -= du[i];
        symmetrize(u);
        r.increments.push_back(norm2(du));
    }
    r.state = {lambda, std::move(u)};
    return r;
}

Profile well_seed(const Weight& w, const Mesh& m, const std::vector<bool>& wells, double lambda)
{
    if (!(lambda < 0.0))
        throw Error(ErrorKind::Domain, "well seeds need lambda < 0");
    if (!(w.eps() > 0.0))
        throw Error(ErrorKind::Domain, "well seeds need eps > 0");
    if (wells.size() != w.intervals().size())
        throw Error(ErrorKind::MaskMismatch, "one bit per depressed interval expected");
    Profile u(m.interior(), 0.0);
    for (std::size_t j = 0; j < wells.size(); ++j) {
        if (wells[j])
            add_bump(u, m, w.intervals()[j], std::sqrt(-2.0 * lambda / w.eps()), std::sqrt(-lambda),
                     w.intervals()[j].center());
    }
    return u;
}

std::vector<std::size_t> peak_indices(std::span<const double> u, double rel_height)
{
    std::vector<std::size_t> out;
    if (u.empty())
        return out;
    const double top = *std::max_element(u.begin(), u.end());
    if (!(top > 0.0))
        return out;
    const std::size_t n = u.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double l = i > 0 ? u[i - 1] : 0.0;
        const double r = i + 1 < n ? u[i + 1] : 0.0;
        if (u[i] > l && u[i] >= r && u[i] >= rel_height * top) {
            // Plateaus count once, at their left end.
            out.push_back(i);
        }
    }
    return out;
}

PeakMask peak_mask_of(const Discretization& d, std::span<const double> u, double rel_height)
{
    const auto support = support_intervals(d.weight());
    PeakMask m{std::vector<bool>(support.size(), false)};
    for (std::size_t i : peak_indices(u, rel_height)) {
        const double x = d.x()[i];
        for (std::size_t j = 0; j < support.size(); ++j) {
            if (x >= support[j].left && x <= support[j].right)
                m.bits[j] = true;
        }
    }
    return m;
}

bool same_solution(const Discretization& d, std::span<const double> a, std::span<const double> b,
                   const DedupOptions& opt)
{
    if (std::abs(d.l2_norm(a) - d.l2_norm(b)) > opt.norm_tol)
        return false;
    double diff = 0.0, top = 1.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        diff = std::max(diff, std::abs(a[i] - b[i]));
        top = std::max({top, std::abs(a[i]), std::abs(b[i])});
    }
    return diff <= opt.profile_tol * top;
}

bool on_known_branch(const Discretization& d, double lambda, std::span<const double> u,
                     const std::vector<Branch>& branches, const DedupOptions& opt)
{
    for (const auto& br : branches) {
        const auto& p = br.points;
        for (std::size_t k = 0; k < p.size(); ++k) {
            if (p[k].lambda == lambda && same_solution(d, p[k].u, u, opt))
                return true;
            if (k + 1 == p.size())
                break;
            const double l0 = p[k].lambda, l1 = p[k + 1].lambda;
            if (!((l0 - lambda) * (l1 - lambda) < 0.0))
                continue;
            const double w = (lambda - l0) / (l1 - l0);
            Profile guess(p[k].u.size());
            for (std::size_t i = 0; i < guess.size(); ++i)
                guess[i] = p[k].u[i] + w * (p[k + 1].u[i] - p[k].u[i]);
            // Cheap rejection before the correction.
            const double nguess = d.l2_norm(guess);
            const double nu = d.l2_norm(u);
            if (std::abs(nguess - nu) > 0.1 * std::max(1.0, nu) + 0.5 * std::abs(p[k].l2norm - p[k + 1].l2norm))
                continue;
            double gap = 0.0, spread = 0.0, top = 1.0;
            for (std::size_t i = 0; i < guess.size(); ++i) {
                gap = std::max(gap, std::abs(guess[i] - u[i]));
                spread = std::max(spread, std::abs(p[k + 1].u[i] - p[k].u[i]));
                top = std::max(top, std::abs(u[i]));
            }
            if (gap > 0.1 * top + spread)
                continue;
            const auto r = newton_fixed_lambda(d, lambda, std::move(guess), opt.newton);
            if (r.converged() && same_solution(d, r.state.u, u, opt))
                return true;
        }
    }
    return false;
}

namespace {

std::optional<SolutionPoint> screen(const Discretization& d, double lambda, const NewtonResult& r,
                                    const std::vector<Branch>& known, const IsolaOptions& opt,
                                    const std::function<void(const std::string&)>& note)
{
    if (!r.converged()) {
        note(std::string("newton ") + to_string(r.status));
        return std::nullopt;
    }
    const auto& u = r.state.u;
    const double umin = *std::min_element(u.begin(), u.end());
    const double umax = *std::max_element(u.begin(), u.end());
    if (opt.require_positive && (umin < -1e-8 || !(umax > 1e-8))) {
        note("converged to a non-positive solution");
        return std::nullopt;
    }
    if (on_known_branch(d, lambda, u, known, opt.dedup)) {
        note("duplicate of a known branch");
        return std::nullopt;
    }
    note("new solution");
    return make_point(d, lambda, u, PointTag::BranchStart);
}

// Pinned Newton from the balanced seed, then plain Newton from the centered
// one; the first converged attempt whose peaks match `mask` wins.
std::optional<NewtonResult> solve_mask(const Discretization& d, double lambda, const PeakMask& mask,
                                       const NewtonOptions& opt, std::string* seed_name = nullptr)
{
    const auto& w = d.weight();
    auto fits = [&](const NewtonResult& r) {
        if (!r.converged())
            return false;
        const auto& u = r.state.u;
        const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
        return *lo >= -1e-8 && *hi > 1e-6 && peak_mask_of(d, u) == mask;
    };
    try {
        auto r = pinned_newton(d, lambda, peak_pattern_seed(w, d.mesh(), mask, lambda, PeakPlacement::Balanced),
                               peak_translation_modes(w, d.mesh(), mask, lambda, PeakPlacement::Balanced), opt);
        if (fits(r)) {
            if (seed_name)
                *seed_name = "balanced";
            return r;
        }
    }
    catch (const Error&) {
    }
    try {
        auto r = newton_fixed_lambda(d, lambda, peak_pattern_seed(w, d.mesh(), mask, lambda), opt);
        if (fits(r)) {
            if (seed_name)
                *seed_name = "center";
            return r;
        }
    }
    catch (const Error&) {
    }
    return std::nullopt;
}

}  // namespace

std::optional<SolutionPoint> find_new_solution(const Discretization& d, double lambda, Profile seed,
                                               const std::vector<Branch>& known, const IsolaOptions& opt,
                                               std::string* diagnostic)
{
    auto note = [&](const std::string& s) {
        if (diagnostic)
            *diagnostic = s;
    };
    try {
        return screen(d, lambda, newton_fixed_lambda(d, lambda, std::move(seed), opt.newton), known, opt, note);
    }
    catch (const Error& e) {
        note(e.what());
        return std::nullopt;
    }
}

std::optional<SolutionPoint> find_isola(const Discretization& d, double lambda, const PeakMask& mask,
                                        const std::vector<Branch>& known, const IsolaOptions& opt,
                                        std::string* diagnostic)
{
    auto note = [&](const std::string& s) {
        if (diagnostic)
            *diagnostic = s;
    };
    checked_support(d.weight(), mask, lambda);
    auto r = solve_mask(d, lambda, mask, opt.newton);
    if (!r) {
        note("no solution with peak mask " + mask.to_string());
        return std::nullopt;
    }
    return screen(d, lambda, *r, known, opt, note);
}

std::vector<CensusEntry> mask_census(const Discretization& d, double lambda, const std::vector<PeakMask>& masks,
                                     const DedupOptions& opt)
{
    std::vector<std::optional<CensusEntry>> found(masks.size());
    auto attempt = [&](std::size_t k) {
        std::string seed;
        if (auto r = solve_mask(d, lambda, masks[k], opt.newton, &seed))
            found[k] = CensusEntry{masks[k], r->state.u, d.l2_norm(r->state.u), seed};
    };

    const unsigned workers = std::max(1u, std::min<unsigned>(std::thread::hardware_concurrency(), masks.size()));
    std::atomic<std::size_t> next{0};
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < workers; ++t)
            pool.emplace_back([&] {
                for (std::size_t k; (k = next.fetch_add(1)) < masks.size();)
                    attempt(k);
            });
    }

    std::vector<CensusEntry> out;
    for (auto& f : found) {
        if (!f)
            continue;
        const bool dup = std::any_of(out.begin(), out.end(), [&](const CensusEntry& e) {
            return same_solution(d, e.u, f->u, opt);
        });
        if (!dup)
            out.push_back(std::move(*f));
    }
    return out;
}

std::vector<CensusEntry> mask_census(const Discretization& d, double lambda, const DedupOptions& opt)
{
    return mask_census(d, lambda, enumerate_masks(d.weight().kappa()), opt);
}

}  // namespace nehari
