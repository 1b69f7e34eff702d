#include "nehari/shooting.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <numbers>
#include <sstream>
#include <thread>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint.hpp>

#include "nehari/corrector.hpp"
#include "nehari/error.hpp"

namespace nehari {

double potential_energy(double lambda, double a_val, double u)
{
    const double u2 = u * u;
    return 0.5 * lambda * u2 + 0.25 * a_val * u2 * u2;
}

double phase_energy(double lambda, double a_val, double u, double v)
{
    return 0.5 * v * v + potential_energy(lambda, a_val, u);
}

const char* to_string(ShotStatus s) noexcept
{
    switch (s) {
    case ShotStatus::Reached: return "reached";
    case ShotStatus::LeftCone: return "left_cone";
    case ShotStatus::BlowUp: return "blow_up";
    }
    return "?";
}

namespace {

using State = std::array<double, 2>;

constexpr double kExitLevel = -1e-12;
constexpr double kBlowUp = 1e8;

// Breakpoints 0 = b_0 < ... < b_m = 1 and the weight value on each piece.
void pieces_of(const Weight& w, std::vector<double>& br, std::vector<double>& av)
{
    br = {0.0};
    for (const auto& iv : w.intervals()) {
        br.push_back(iv.left);
        br.push_back(iv.right);
    }
    br.push_back(1.0);
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end()), br.end());
    av.clear();
    for (std::size_t k = 0; k + 1 < br.size(); ++k)
        av.push_back(w(0.5 * (br[k] + br[k + 1])));
}

// Zero of the cubic Hermite interpolant between two samples with u0 >= 0 > u1.
double hermite_crossing(const TrajectorySample& p, const TrajectorySample& q)
{
    const double dx = q.x - p.x;
    auto at = [&](double s) {
        const double s2 = s * s, s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * p.u + (s3 - 2 * s2 + s) * dx * p.v + (-2 * s3 + 3 * s2) * q.u +
               (s3 - s2) * dx * q.v;
    };
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (at(mid) >= 0.0 ? lo : hi) = mid;
    }
    return p.x + 0.5 * (lo + hi) * dx;
}

}  // namespace

Trajectory integrate_ivp(const Weight& w, double lambda, double v0, double step_tol)
{
    if (!(v0 > 0.0))
        throw Error(ErrorKind::Domain, "initial slope must be positive");
    if (!(step_tol > 0.0))
        throw Error(ErrorKind::Domain, "step tolerance must be positive");

    namespace ode = boost::numeric::odeint;
    std::vector<double> br, av;
    pieces_of(w, br, av);

    Trajectory t;
    t.v0 = v0;
    t.lambda = lambda;
    t.samples.push_back({0.0, 0.0, v0});

    State y{0.0, v0};
    double dt = 1e-3;
    for (std::size_t k = 0; k + 1 < br.size(); ++k) {
        const double a = av[k], end = br[k + 1];
        auto rhs = [&](const State& s, State& ds, double) {
            ds[0] = s[1];
            ds[1] = -lambda * s[0] - a * s[0] * s[0] * s[0];
        };
        // relative control: shots with tiny v0 grow by many orders of magnitude
        auto stepper = ode::make_controlled(step_tol * 1e-12, step_tol, ode::runge_kutta_dopri5<State>());
        t.pieces.push_back({a, t.samples.size() - 1, t.samples.size() - 1});
        double x = br[k];
        while (x < end) {
            double h = std::min(dt, end - x);
            const bool hits = h >= end - x;
            if (stepper.try_step(rhs, y, x, h) == ode::fail) {
                dt = h;
                continue;
            }
            if (hits)
                x = end;
            dt = hits ? std::max(dt, h) : h;
            const TrajectorySample s{x, y[0], y[1]};
            if (s.u < kExitLevel) {
                t.exit_x = hermite_crossing(t.samples.back(), s);
                t.samples.push_back(s);
                t.pieces.back().last = t.samples.size() - 1;
                t.status = ShotStatus::LeftCone;
                return t;
            }
            t.samples.push_back(s);
            t.pieces.back().last = t.samples.size() - 1;
            if (std::abs(s.u) > kBlowUp) {
                t.status = ShotStatus::BlowUp;
                std::ostringstream os;
                os << "|u| exceeded 1e8 at x = " << s.x;
                t.diagnostic = os.str();
                return t;
            }
        }
    }
    return t;
}

double energy_drift(const Trajectory& t)
{
    double worst = 0.0;
    for (const auto& p : t.pieces) {
        const auto& s0 = t.samples[p.first];
        const double e0 = phase_energy(t.lambda, p.a, s0.u, s0.v);
        double scale = 0.0, drift = 0.0;
        for (std::size_t i = p.first; i <= p.last; ++i) {
            const auto& s = t.samples[i];
            scale = std::max(scale, 0.5 * s.v * s.v + 0.5 * std::abs(t.lambda) * s.u * s.u +
                                        0.25 * p.a * s.u * s.u * s.u * s.u);
            drift = std::max(drift, std::abs(phase_energy(t.lambda, p.a, s.u, s.v) - e0));
        }
        if (scale > 0.0)
            worst = std::max(worst, drift / scale);
    }
    return worst;
}

namespace {

struct Shot {
    double v0 = 0.0;
    bool valid = false;
    double miss = 0.0;
    Trajectory traj;
};

Shot fire(const Weight& w, double lambda, double v0, double tol)
{
    Shot s;
    s.v0 = v0;
    s.traj = integrate_ivp(w, lambda, v0, tol);
    switch (s.traj.status) {
    case ShotStatus::Reached:
        s.valid = true;
        s.miss = s.traj.back().u;
        break;
    case ShotStatus::LeftCone:
        s.valid = true;
        s.miss = -(1.0 - *s.traj.exit_x);
        break;
    case ShotStatus::BlowUp: break;
    }
    return s;
}

}  // namespace

ShootResult shoot_count(const Weight& w, double lambda, const ShootOptions& opt)
{
    if (opt.grid_size < 100)
        throw Error(ErrorKind::Domain, "grid_size must be at least 100");
    ShootResult res;
    res.v0_max = opt.v0_max ? *opt.v0_max
                            : 2.0 * std::pow(std::max(-2.0 * lambda, 4.0 * std::numbers::pi * std::numbers::pi), 1.5);
    if (!(res.v0_max > 0.0))
        throw Error(ErrorKind::Domain, "v0_max must be positive");

    const std::size_t n = opt.grid_size;
    const double ratio = std::pow(10.0, opt.decades / static_cast<double>(n - 1));
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i)
        grid[i] = res.v0_max * std::pow(10.0, -opt.decades * static_cast<double>(n - 1 - i) / (n - 1));

    std::vector<Shot> shots(n);
    {
        std::atomic<std::size_t> next{0};
        const unsigned workers = std::max(1u, std::thread::hardware_concurrency());
        std::vector<std::jthread> pool;
        for (unsigned k = 0; k < workers; ++k)
            pool.emplace_back([&] {
                for (std::size_t i; (i = next.fetch_add(1)) < n;) {
                    shots[i] = fire(w, lambda, grid[i], opt.step_tol);
                    shots[i].traj.samples.clear();
                    shots[i].traj.pieces.clear();
                }
            });
    }

    // Pairs of roots inside one cell leave no sign change; look for them at
    // interior minima of |M| and split the cell where M changes sign.
    std::vector<Shot> extra;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const Shot &l = shots[i - 1], &c = shots[i], &r = shots[i + 1];
        if (!l.valid || !c.valid || !r.valid)
            continue;
        const double sg = c.miss > 0.0 ? 1.0 : -1.0;
        if (sg * l.miss <= 0.0 || sg * r.miss <= 0.0 || std::abs(c.miss) >= std::abs(l.miss) ||
            std::abs(c.miss) >= std::abs(r.miss))
            continue;
        double a = std::log(l.v0), b = std::log(r.v0);
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = b - g * (b - a), x2 = a + g * (b - a);
        Shot s1 = fire(w, lambda, std::exp(x1), opt.step_tol), s2 = fire(w, lambda, std::exp(x2), opt.step_tol);
        for (int it = 0; it < 80; ++it) {
            if (!s1.valid || !s2.valid)
                break;
            if (sg * s1.miss <= 0.0 || sg * s2.miss <= 0.0) {
                extra.push_back(sg * s1.miss <= 0.0 ? std::move(s1) : std::move(s2));
                extra.back().traj.samples.clear();
                extra.back().traj.pieces.clear();
                break;
            }
            if (sg * s1.miss < sg * s2.miss) {
                b = x2;
                x2 = x1;
                s2 = std::move(s1);
                x1 = b - g * (b - a);
                s1 = fire(w, lambda, std::exp(x1), opt.step_tol);
            }
            else {
                a = x1;
                x1 = x2;
                s1 = std::move(s2);
                x2 = a + g * (b - a);
                s2 = fire(w, lambda, std::exp(x2), opt.step_tol);
            }
        }
    }
    for (auto& e : extra)
        shots.push_back(std::move(e));
    std::sort(shots.begin(), shots.end(), [](const Shot& x, const Shot& y) { return x.v0 < y.v0; });

    for (std::size_t i = 0; i + 1 < shots.size(); ++i) {
        const Shot &a = shots[i], &b = shots[i + 1];
        if (!a.valid || !b.valid || (a.miss > 0.0) == (b.miss > 0.0))
            continue;
        double lo = a.v0, hi = b.v0;
        const bool lo_positive = a.miss > 0.0;
        while (hi - lo > std::min(opt.root_tol, opt.root_tol * lo)) {
            const double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi)
                break;
            const Shot m = fire(w, lambda, mid, opt.step_tol);
            if (!m.valid)
                break;
            ((m.miss > 0.0) == lo_positive ? lo : hi) = mid;
        }
        const Shot neg = fire(w, lambda, lo_positive ? hi : lo, opt.step_tol);
        if (neg.traj.status == ShotStatus::LeftCone && *neg.traj.exit_x < 1.0 - 1e-3) {
            std::ostringstream os;
            os << "discarded bracket near v0 = " << 0.5 * (lo + hi) << " (interior touchdown)";
            res.warnings.push_back(os.str());
            continue;
        }
        const double root = 0.5 * (lo + hi);
        res.roots.push_back(root);
        res.solutions.push_back(fire(w, lambda, lo_positive ? lo : hi, opt.step_tol).traj);
    }
    res.count = res.roots.size();

    for (std::size_t k = 0; k + 1 < res.roots.size(); ++k)
        if (res.roots[k + 1] / res.roots[k] < ratio) {
            std::ostringstream os;
            os << "grid too coarse: roots " << res.roots[k] << " and " << res.roots[k + 1] << " share a cell";
            res.warnings.push_back(os.str());
        }
    for (double r : res.roots)
        if (r > 0.95 * res.v0_max) {
            std::ostringstream os;
            os << "root " << r << " within 5% of v0_max";
            res.warnings.push_back(os.str());
        }
    return res;
}

double time_map(double u0, double lambda)
{
    if (!(lambda < 0.0))
        throw Error(ErrorKind::Domain, "time map needs lambda < 0");
    if (!(u0 * u0 > -2.0 * lambda))
        throw Error(ErrorKind::Domain, "time map needs u0^2 > -2 lambda");
    auto f = [&](double phi) {
        const double s = std::sin(phi);
        return 1.0 / std::sqrt(lambda + 0.5 * u0 * u0 * (1.0 + s * s));
    };
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, 0.5 * std::numbers::pi, 15,
                                                                         1e-14);
}

double time_map_bound(double u0, double lambda)
{
    return 0.5 * std::numbers::pi / std::sqrt(lambda + 0.5 * u0 * u0);
}

DecayIdentity decay_identity(const Weight& w, std::span<const double> x, std::span<const double> u, double lambda,
                             std::size_t interval_index)
{
    if (w.eps() != 0.0)
        throw Error(ErrorKind::Domain, "decay identity needs eps = 0");
    if (interval_index >= w.intervals().size())
        throw Error(ErrorKind::Index, "no such depressed interval");
    if (x.size() != u.size() || x.size() < 2)
        throw Error(ErrorKind::Size, "abscissae and values differ in length");

    const auto& iv = w.intervals()[interval_index];
    const double al = iv.left, be = iv.right, k = std::numbers::pi / w.h();
    auto interp = [&](double t) {
        const auto it = std::lower_bound(x.begin(), x.end(), t);
        const std::size_t j = std::clamp<std::size_t>(it - x.begin(), 1, x.size() - 1);
        const double s = (t - x[j - 1]) / (x[j] - x[j - 1]);
        return (1.0 - s) * u[j - 1] + s * u[j];
    };

    std::vector<double> xs{al}, us{interp(al)};
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] > al && x[i] < be) {
            xs.push_back(x[i]);
            us.push_back(u[i]);
        }
    xs.push_back(be);
    us.push_back(interp(be));

    DecayIdentity r;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
        const double f0 = us[i] * std::sin(k * (xs[i] - al));
        const double f1 = us[i + 1] * std::sin(k * (xs[i + 1] - al));
        r.lhs += 0.5 * (xs[i + 1] - xs[i]) * (f0 + f1);
    }
    r.rhs = (us.back() * (-k) - us.front() * k) / (lambda - k * k);
    r.residual = std::abs(r.lhs - r.rhs) / (std::abs(r.rhs) + 1e-12);
    return r;
}

DecayIdentity check_decay_identity(const Discretization& d, std::span<const double> u, double lambda,
                                   std::size_t interval_index, double newton_tol)
{
    const double res = norm2(d.residual(lambda, u));
    if (res > 10.0 * newton_tol) {
        std::ostringstream os;
        os << "residual norm " << res << " exceeds 10 x " << newton_tol;
        throw Error(ErrorKind::NotASolution, os.str());
    }
    const auto& nodes = d.mesh().nodes();
    std::vector<double> full(nodes.size(), 0.0);
    std::copy(u.begin(), u.end(), full.begin() + 1);
    return decay_identity(d.weight(), nodes, full, lambda, interval_index);
}

DecayIdentity check_decay_identity(const Weight& w, const Trajectory& t, std::size_t interval_index)
{
    std::vector<double> x, u;
    for (const auto& s : t.samples) {
        if (!x.empty() && s.x <= x.back())
            continue;
        x.push_back(s.x);
        u.push_back(s.u);
    }
    return decay_identity(w, x, u, t.lambda, interval_index);
}

}  // namespace nehari
