// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "nehari/diagram.hpp"
#include "nehari/io.hpp"
#include "nehari/shooting.hpp"

using namespace nehari;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what)
    {
        pass = pass && ok;
        if (!detail.empty())
            detail += "; ";
        detail += (ok ? "" : "FAILED ") + what;
    }
};

std::string num(double v, int digits = 6)
{
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

// Every point stored by any run below, as (lambda, principal eigenvalue of its discretization).
std::vector<std::pair<double, double>> g_stored;

void record(const DiagramBundle& b)
{
    const auto w = make_weight(b.config);
    const double lam1 = Discretization(w, make_mesh(b.config, w)).principal_eigenvalue();
    for (const auto& r : b.branches)
        for (const auto& p : r.branch.points)
            g_stored.emplace_back(p.lambda, lam1);
}

RunConfig base(int kappa, double h, double eps, double lambda_min)
{
    RunConfig c;
    c.kappa = kappa;
    c.h = h;
    c.eps = eps;
    c.continuation.lambda_min = lambda_min;
    return c;
}

double within(double got, double want)
{
    return std::abs(got - want) / std::abs(want);
}

// 1. Closed-form eigenvalues against the tabulated ones.
Outcome eigenvalue_table()
{
    Outcome o;
    const std::pair<std::size_t, double> table[] = {{100, 9.868808627128601},  {200, 9.869403719902039},
                                                    {500, 9.869571805000305},  {800, 9.869591832160950},
                                                    {1000, 9.869596123695374}, {2000, 9.869602560997009}};
    double worst_closed = 0.0, worst_bisect = 0.0;
    for (const auto& [n, want] : table) {
        worst_closed = std::max(worst_closed, within(toeplitz_eigenvalue(n, 1), want));
        const Discretization d(build_weight(1, 0.5, 0.0), build_uniform_mesh(n));
        worst_bisect = std::max(worst_bisect, within(bisect_linear_eigenvalue(d, 9.0, 12.0, 1e-6), want));
    }
    o.require(worst_closed <= 1e-9, "closed form max rel err " + num(worst_closed, 3) + " (tol 1e-9)");
    o.detail += "; det-sign bisection on [9,12] to width 1e-6 max rel err " + num(worst_bisect, 3);
    return o;
}

// 2. First branch point on the main branch against its tabulated value, over h.
Outcome branch_points()
{
    Outcome o;
    const std::pair<double, double> table[] = {
        {0.05, -12.40637}, {0.10, -6.55902}, {0.30, 2.03964}, {0.50, 5.34880}, {0.80, 8.21472}};
    std::vector<double> hs;
    for (const auto& [h, lb] : table)
        hs.push_back(h);
    const auto t0 = std::chrono::steady_clock::now();
    const auto rows = run_h_sweep(base(1, 0.05, 0.0, -100.0), hs);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::optional<double> at01, at03;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const double want = table[k].second;
        const auto& got = rows[k].lambda_b;
        const double tol = std::max(5e-2, 0.01 * std::abs(want));
        o.require(got && std::abs(*got - want) <= tol,
                  "h=" + num(table[k].first) + " " + (got ? num(*got, 8) : "none") + " vs " + num(want, 8));
        if (table[k].first == 0.10)
            at01 = got;
        if (table[k].first == 0.30)
            at03 = got;
    }
    o.require(at01 && at03 && *at01 < 0.0 && 0.0 < *at03, "lambda_b(0.1) < 0 < lambda_b(0.3)");
    o.require(secs < 2.0 * 60.0 * hs.size(), "time " + num(secs, 3) + " s");
    return o;
}

// 3. Isola folds for two wells.
Outcome two_well_isolas()
{
    Outcome o;
    const auto b = run_diagram(base(2, 0.25, 0.0, -100.0));
    record(b);
    std::vector<const BranchRecord*> isolas;
    std::vector<double> folds;
    for (const auto& r : b.branches) {
        if (r.role != BranchRole::Isola)
            continue;
        isolas.push_back(&r);
        for (const auto& [k, lam] : r.folds)
            folds.push_back(lam);
    }
    for (double want : {-26.0214, -41.5460}) {
        double best = std::numeric_limits<double>::infinity();
        for (double f : folds)
            best = std::min(best, within(f, want));
        o.require(best <= 0.01, "fold near " + num(want) + " rel err " + num(best, 3));
    }
    const std::size_t components = 1 + isolas.size();
    o.require(components >= 4, std::to_string(components) + " components");
    // Mirror-image isolas share their norm curve.
    bool overlap = false;
    for (std::size_t i = 0; i < isolas.size(); ++i) {
        for (std::size_t j = i + 1; j < isolas.size(); ++j) {
            const auto &p = isolas[i]->branch.points, &q = isolas[j]->branch.points;
            if (p.size() != q.size())
                continue;
            double gap = 0.0;
            for (std::size_t k = 0; k < p.size(); ++k)
                gap = std::max({gap, std::abs(p[k].l2norm - q[k].l2norm), std::abs(p[k].lambda - q[k].lambda)});
            overlap = overlap || gap < 1e-6;
        }
    }
    o.require(overlap, "two norm-overlapping isolas");
    return o;
}

// 4. Isola turning points over eps.
Outcome isola_turning_points()
{
    Outcome o;
    const std::pair<double, double> table[] = {
        {0.30, -1111.65254}, {0.50, -499.07238}, {0.51, -555.55043}, {0.70, -1112.24066}, {0.90, -2107.12751}};
    std::vector<double> eps;
    for (const auto& [e, lt] : table)
        eps.push_back(e);
    const auto sweep = run_epsilon_sweep(base(1, 0.1, 0.0, -3000.0), eps);
    for (const auto& b : sweep.bundles)
        record(b);
    std::vector<double> got;
    for (std::size_t k = 0; k < sweep.report.size(); ++k) {
        const auto& row = sweep.report[k];
        const double want = table[k].second;
        o.require(row.lambda_t && within(*row.lambda_t, want) <= 0.01,
                  "eps=" + num(row.eps) + " " + (row.lambda_t ? num(*row.lambda_t, 9) : "none") + " vs " +
                      num(want, 9));
        got.push_back(row.lambda_t.value_or(-std::numeric_limits<double>::infinity()));
    }
    const auto top = static_cast<std::size_t>(std::max_element(got.begin(), got.end()) - got.begin());
    o.require(eps[top] == 0.50 && top > 0 && top + 1 < got.size(), "interior maximum at eps=" + num(eps[top]));
    return o;
}

// 5. Multiplicity at lambda = -3000, and the shooting count at -100.
Outcome multiplicity()
{
    Outcome o;
    const Discretization d1(build_weight(1, 0.1, 0.0), build_uniform_mesh(500));
    const Discretization d2(build_weight(2, 0.15, 0.0), build_uniform_mesh(500));
    const auto c1 = mask_census(d1, -3000.0).size();
    const auto c2 = mask_census(d2, -3000.0).size();
    const auto shots = shoot_count(build_weight(1, 0.1, 0.0), -100.0);
    o.require(c1 == 3, "kappa=1 census " + std::to_string(c1));
    o.require(c2 == 7, "kappa=2 census " + std::to_string(c2));
    o.require(shots.count == 3, "kappa=1 shooting at -100: " + std::to_string(shots.count));
    return o;
}

// 6. Decay on the wells for kappa = 2, h = 0.15 at lambda = -3000.
Outcome decay()
{
    Outcome o;
    const double lam = -3000.0;
    const Discretization d(build_weight(2, 0.15, 0.0), build_uniform_mesh(500));
    const auto census = mask_census(d, lam);
    o.require(census.size() == 7, std::to_string(census.size()) + " solutions");
    const double bound = 0.05 * std::sqrt(-2.0 * lam);
    double worst_max = 0.0, worst_identity = 0.0;
    for (const auto& e : census) {
        for (std::size_t i = 0; i < d.size(); ++i) {
            for (const auto& iv : d.weight().intervals())
                if (d.x()[i] > iv.left && d.x()[i] < iv.right)
                    worst_max = std::max(worst_max, e.u[i]);
        }
        for (std::size_t k = 0; k < d.weight().intervals().size(); ++k)
            worst_identity = std::max(worst_identity, check_decay_identity(d, e.u, lam, k).residual);
    }
    o.require(worst_max <= bound, "max on wells " + num(worst_max, 4) + " vs 0.05 sqrt(-2 lambda) = " + num(bound, 4));
    o.require(worst_identity <= 2e-2, "identity residual " + num(worst_identity, 3) + " (tol 2e-2)");
    return o;
}

// 7. Property suite.
Outcome properties()
{
    Outcome o;
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);

    {  // Jacobian against central differences
        double worst = 0.0;
        for (int s = 0; s < 100; ++s) {
            const int kappa = 1 + s % 3;
            const auto w = build_weight(kappa, 0.1 + 0.1 * std::abs(U(rng)), std::abs(U(rng)));
            const Discretization d(w, build_uniform_mesh(40 + 10 * (s % 5)));
            const double lam = 100.0 * U(rng);
            const auto x = d.x();
            Profile u(d.size()), v(d.size());
            const double a1 = 5 * U(rng), a2 = 5 * U(rng);
            for (std::size_t i = 0; i < u.size(); ++i) {
                u[i] = a1 * std::sin(std::numbers::pi * x[i]) + a2 * std::sin(3 * std::numbers::pi * x[i]);
                v[i] = U(rng);
            }
            const auto jv = d.jacobian(lam, u).apply(v);
            const double step = 1e-5;
            Profile up = u, um = u;
            for (std::size_t i = 0; i < u.size(); ++i) {
                up[i] += step * v[i];
                um[i] -= step * v[i];
            }
            const auto fp = d.residual(lam, up), fm = d.residual(lam, um);
            double num_ = 0.0, den = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) {
                num_ = std::max(num_, std::abs((fp[i] - fm[i]) / (2 * step) - jv[i]));
                den = std::max(den, std::abs(jv[i]));
            }
            worst = std::max(worst, num_ / den);
        }
        o.require(worst <= 1e-6, "jacobian " + num(worst, 3));
    }
    {  // energy on each constant piece
        double worst = 0.0;
        for (auto [kappa, h, eps, lam] : {std::tuple{1, 0.5, 0.0, -100.0}, std::tuple{2, 0.15, 0.0, -300.0},
                                          std::tuple{1, 0.1, 0.5, -700.0}}) {
            const auto w = build_weight(kappa, h, eps);
            for (int i = 0; i < 40; ++i)
                worst = std::max(worst, energy_drift(integrate_ivp(w, lam, std::pow(10.0, -4.0 + 7.0 * i / 39.0))));
        }
        o.require(worst <= 1e-9, "energy drift " + num(worst, 3));
    }
    {  // reflection equivariance: residual, branches, mask seeding
        const Discretization d(build_weight(2, 0.25, 0.0), build_uniform_mesh(300));
        Profile u(d.size());
        for (auto& e : u)
            e = 10.0 * U(rng);
        const auto f = d.residual(-50.0, u);
        const auto fr = d.residual(-50.0, Discretization::reflect(u));
        const auto rf = Discretization::reflect(f);
        double res = 0.0, top = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i) {
            res = std::max(res, std::abs(fr[i] - rf[i]));
            top = std::max(top, std::abs(f[i]));
        }
        o.require(res <= 1e-12 * top, "residual reflection " + num(res / top, 3));

        const auto mask = PeakMask::from_string("100");
        const auto a = mask_census(d, -300.0, {mask});
        const auto b = mask_census(d, -300.0, {mask.reflected()});
        double seed_gap = std::numeric_limits<double>::infinity();
        if (a.size() == 1 && b.size() == 1) {
            const auto rb = Discretization::reflect(b[0].u);
            seed_gap = 0.0;
            for (std::size_t i = 0; i < rb.size(); ++i)
                seed_gap = std::max(seed_gap, std::abs(a[0].u[i] - rb[i]));
        }
        o.require(seed_gap <= 1e-6, "mask seeding reflection " + num(seed_gap, 3));

        ContinuationConfig cfg;
        cfg.max_steps = 30;
        const auto p = make_point(d, -300.0, a.empty() ? Profile(d.size(), 0.0) : a[0].u);
        const auto t = initial_tangent(d, {p.lambda, p.u}, +1);
        const auto br1 = continue_branch(d, p, t, cfg);
        const auto br2 = continue_branch(d, make_point(d, p.lambda, Discretization::reflect(p.u)),
                                         Tangent{Discretization::reflect(t.du), t.dlambda}, cfg);
        double branch_gap = br1.points.size() == br2.points.size() ? 0.0 : 1.0;
        for (std::size_t k = 0; k < std::min(br1.points.size(), br2.points.size()); ++k) {
            const auto r = Discretization::reflect(br2.points[k].u);
            double scale = 1.0;
            for (double e : r)
                scale = std::max(scale, std::abs(e));
            double gap = std::abs(br1.points[k].lambda - br2.points[k].lambda);
            for (std::size_t i = 0; i < r.size(); ++i)
                gap = std::max(gap, std::abs(br1.points[k].u[i] - r[i]));
            branch_gap = std::max(branch_gap, gap / scale);
        }
        o.require(branch_gap <= 1e-8, "branch reflection " + num(branch_gap, 3));
    }
    {  // time map below its bound
        int below = 0;
        for (int i = 0; i < 10; ++i)
            for (int j = 0; j < 10; ++j) {
                const double lam = -1.0 - 99.0 * i / 9.0;
                const double u0 = std::sqrt(-2.0 * lam) * (1.01 + 4.0 * j / 9.0);
                below += time_map(u0, lam) < time_map_bound(u0, lam);
            }
        o.require(below == 100, "time map below bound at " + std::to_string(below) + "/100");
    }
    {  // det sign flips at the discrete eigenvalues
        const std::size_t n = 500;
        const Discretization d(build_weight(1, 0.1, 0.0), build_uniform_mesh(n));
        int flips = 0;
        for (std::size_t k = 1; k <= 5; ++k) {
            const double ev = toeplitz_eigenvalue(n, k);
            auto sign_at = [&](double lam) {
                auto m = d.laplacian();
                for (auto& e : m.diag)
                    e -= lam;
                return det_sign(m, 0.0).sign;
            };
            flips += sign_at(ev * (1 - 1e-6)) == -sign_at(ev * (1 + 1e-6));
        }
        o.require(flips == 5, "det sign flips " + std::to_string(flips) + "/5");
    }
    {  // bordered solve against a dense LU
        double worst = 0.0;
        for (std::size_t n : {1u, 5u, 20u, 50u, 100u}) {
            BandedJacobian j(n);
            std::vector<double> b(n), rhs(n + 1);
            Tangent t{std::vector<double>(n), U(rng)};
            Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 1, n + 1);
            for (std::size_t i = 0; i < n; ++i) {
                j.diag[i] = a(i, i) = 2.0 + U(rng);
                if (i + 1 < n) {
                    j.sup[i] = a(i, i + 1) = U(rng);
                    j.sub[i] = a(i + 1, i) = U(rng);
                }
                b[i] = a(i, n) = U(rng);
                t.du[i] = a(n, i) = U(rng);
                rhs[i] = U(rng);
            }
            a(n, n) = t.dlambda;
            rhs[n] = U(rng);
            const Eigen::VectorXd ref =
                a.partialPivLu().solve(Eigen::Map<const Eigen::VectorXd>(rhs.data(), static_cast<Eigen::Index>(n + 1)));
            const auto x = bordered_solve(j, b, t, rhs).x;
            worst = std::max(worst,
                             (Eigen::Map<const Eigen::VectorXd>(x.data(), static_cast<Eigen::Index>(n + 1)) - ref).norm() /
                                 ref.norm());
        }
        o.require(worst <= 1e-10, "bordered solve " + num(worst, 3));
    }
    {  // byte-identical reruns
        const auto cfg = base(1, 0.05, 0.0, -100.0);
        const auto a = run_diagram(cfg), b = run_diagram(cfg);
        record(a);
        auto strip = [](const DiagramBundle& x) {
            auto j = nlohmann::json::parse(bundle_json(x));
            j["provenance"].erase("wall_time_s");
            return j.dump();
        };
        const bool same = strip(a) == strip(b) && branches_csv(a) == branches_csv(b) &&
                          events_jsonl(a) == events_jsonl(b) && emit_svg(a) == emit_svg(b);
        o.require(same, "identical reruns");
    }
    return o;
}

// 8. Nonexistence bound.
Outcome nonexistence()
{
    Outcome o;
    std::size_t above = 0;
    for (const auto& [lam, lam1] : g_stored)
        above += lam >= lam1;
    o.require(above == 0, std::to_string(above) + " of " + std::to_string(g_stored.size()) +
                              " stored points at or above lambda_1(N)");
    const auto shots = shoot_count(build_weight(1, 0.1, 1.0), 15.0);
    o.require(shots.count == 0, "shooting count at lambda = 15 with a = 1: " + std::to_string(shots.count));
    return o;
}

}  // namespace

int main()
{
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"1 eigenvalue table", eigenvalue_table},
        {"2 secondary bifurcation values", branch_points},
        {"3 two-well isola folds", two_well_isolas},
        {"4 isola turning points over eps", isola_turning_points},
        {"5 multiplicity census", multiplicity},
        {"6 decay on the wells", decay},
        {"7 property suite", properties},
        {"8 nonexistence bound", nonexistence},  // last: checks every point stored above
    };
    int failed = 0;
    for (const auto& [name, run] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = run();
        }
        catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("[%s] %s (%.1f s): %s\n", o.pass ? "PASS" : "FAIL", name, secs, o.detail.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    }
    std::printf("%d of %zu criteria failed\n", failed, std::size(criteria));
    return failed ? 1 : 0;
}
