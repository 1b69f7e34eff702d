#include "doctest.h"

#include <array>
#include <cmath>
#include <numbers>

#include <boost/numeric/odeint.hpp>

#include "nehari/error.hpp"
#include "nehari/seeding.hpp"
#include "nehari/shooting.hpp"

using namespace nehari;

namespace {

// Cubic Hermite interpolation of a shot at x.
double shot_at(const Trajectory& t, double x)
{
    const auto& s = t.samples;
    std::size_t j = 1;
    while (j + 1 < s.size() && s[j].x < x)
        ++j;
    const auto &p = s[j - 1], &q = s[j];
    const double dx = q.x - p.x;
    if (dx <= 0.0)
        return q.u;
    const double r = (x - p.x) / dx, r2 = r * r, r3 = r2 * r;
    return (2 * r3 - 3 * r2 + 1) * p.u + (r3 - 2 * r2 + r) * dx * p.v + (-2 * r3 + 3 * r2) * q.u +
           (r3 - r2) * dx * q.v;
}

double profile_gap(const Discretization& d, const Trajectory& t, std::span<const double> u)
{
    double gap = 0.0, top = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        gap = std::max(gap, std::abs(shot_at(t, d.x()[i]) - u[i]));
        top = std::max(top, std::abs(u[i]));
    }
    return gap / std::max(1.0, top);
}

Weight unit_weight()
{
    return build_weight(1, 0.1, 1.0);
}

}  // namespace

TEST_CASE("potential energy")
{
    CHECK(potential_energy(-2.0, 1.0, 2.0) == doctest::Approx(0.0));
    CHECK(potential_energy(3.0, 0.7, 0.0) == 0.0);
    CHECK(potential_energy(-1.0, 1.0, 1.0) == doctest::Approx(-0.25));
}

TEST_CASE("integrate_ivp preconditions and shape")
{
    CHECK_THROWS_AS(integrate_ivp(unit_weight(), 0.0, 0.0), Error);
    CHECK_THROWS_AS(integrate_ivp(unit_weight(), 0.0, 1.0, 0.0), Error);

    auto t = integrate_ivp(build_weight(2, 0.25, 0.0), -100.0, 2.0);
    CHECK(t.samples.front().u == 0.0);
    CHECK(t.samples.front().v == 2.0);
    // pieces are separated exactly at the interval endpoints
    const auto& w = build_weight(2, 0.25, 0.0);
    std::vector<double> ends;
    for (std::size_t k = 0; k + 1 < t.pieces.size(); ++k)
        ends.push_back(t.samples[t.pieces[k].last].x);
    std::vector<double> expect;
    for (const auto& iv : w.intervals()) {
        expect.push_back(iv.left);
        expect.push_back(iv.right);
    }
    if (t.status == ShotStatus::Reached) {
        REQUIRE(ends.size() == expect.size());
        for (std::size_t k = 0; k < ends.size(); ++k)
            CHECK(ends[k] == expect[k]);
    }

    auto big = integrate_ivp(build_weight(1, 0.9, 0.0), -3000.0, 1e3);
    CHECK(big.status == ShotStatus::BlowUp);
    CHECK(!big.diagnostic.empty());
}

TEST_CASE("energy is conserved on every constant piece")
{
    struct Case {
        int kappa;
        double h, eps, lambda;
    };
    for (auto c : {Case{1, 0.5, 0.0, -100.0}, Case{1, 0.1, 0.0, -100.0}, Case{2, 0.15, 0.0, -300.0},
                   Case{1, 0.1, 0.5, -700.0}, Case{1, 0.1, 1.0, 0.0}}) {
        const auto w = build_weight(c.kappa, c.h, c.eps);
        for (int i = 0; i < 60; ++i) {
            const double v0 = std::pow(10.0, -4.0 + 7.0 * i / 59.0);
            const auto t = integrate_ivp(w, c.lambda, v0, 1e-10);
            CAPTURE(v0);
            CHECK(energy_drift(t) <= 1e-9);
        }
    }
}

TEST_CASE("shooting counts")
{
    SUBCASE("autonomous, lambda = 0: one solution matching the FD one")
    {
        auto r = shoot_count(unit_weight(), 0.0);
        REQUIRE(r.count == 1);
        const auto& t = r.solutions[0];
        CHECK(t.back().v == doctest::Approx(-r.roots[0]).epsilon(1e-6));

        Discretization d(unit_weight(), build_uniform_mesh(500));
        auto fd = newton_fixed_lambda(d, 0.0, sine_seed(d.mesh(), 3.7), {1e-8, 50});
        REQUIRE(fd.converged());
        double gap = 0.0;
        for (std::size_t i = 0; i < fd.state.u.size(); ++i)
            gap = std::max(gap, std::abs(shot_at(t, d.x()[i]) - fd.state.u[i]));
        CHECK(gap < 1e-3);
    }
    SUBCASE("autonomous, lambda = 15: none")
    {
        CHECK(shoot_count(unit_weight(), 15.0).count == 0);
    }
    SUBCASE("one well, h = 0.5, lambda = -100: three")
    {
        auto r = shoot_count(build_weight(1, 0.5, 0.0), -100.0);
        CHECK(r.count == 3);
    }
    CHECK_THROWS_AS(shoot_count(unit_weight(), 0.0, {.grid_size = 50}), Error);
}

TEST_CASE("shooting agrees with the FD census")
{
    const auto w = build_weight(1, 0.5, 0.0);
    Discretization d(w, build_uniform_mesh(500));
    for (double lam : {-20.0, -50.0, -100.0}) {
        CAPTURE(lam);
        const auto shots = shoot_count(w, lam);
        const auto census = mask_census(d, lam);
        CHECK(shots.count == census.size());
        for (const auto& t : shots.solutions) {
            int matches = 0;
            for (const auto& e : census)
                matches += profile_gap(d, t, e.u) <= 1e-2;
            CHECK(matches == 1);
        }
    }
}

TEST_CASE("local maxima of shooting solutions lie where a = 1")
{
    for (double lam : {-20.0, -100.0}) {
        for (const auto& w : {build_weight(1, 0.5, 0.0), build_weight(1, 0.1, 0.0), build_weight(2, 0.25, 0.0)}) {
            for (const auto& t : shoot_count(w, lam).solutions) {
                const auto& s = t.samples;
                for (std::size_t i = 1; i + 1 < s.size(); ++i)
                    if (s[i].u > s[i - 1].u && s[i].u > s[i + 1].u) {
                        CAPTURE(s[i].x);
                        CHECK(w(s[i].x) == 1.0);
                    }
            }
        }
    }
}

TEST_CASE("time map")
{
    CHECK_THROWS_AS(time_map(1.0, -1.0), Error);
    CHECK_THROWS_AS(time_map(3.0, 1.0), Error);
    CHECK(time_map(100.0, -1.0) < 0.02);

    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j) {
            const double lam = -1.0 - 99.0 * i / 9.0;
            const double u0 = std::sqrt(-2.0 * lam) * (1.0 + 0.01 + 4.0 * j / 9.0);
            CHECK(time_map(u0, lam) < time_map_bound(u0, lam));
        }

    // direct timing: from (0, v0) on the orbit through (2, 0) until v = 0
    namespace ode = boost::numeric::odeint;
    const double lam = -1.0, u0 = 2.0;
    const double v0 = std::sqrt(2.0 * potential_energy(lam, 1.0, u0));
    using S = std::array<double, 2>;
    auto rhs = [&](const S& s, S& ds, double) {
        ds[0] = s[1];
        ds[1] = -lam * s[0] - s[0] * s[0] * s[0];
    };
    S y{0.0, v0};
    double x = 0.0, dt = 1e-4;
    auto stepper = ode::make_controlled(1e-13, 1e-13, ode::runge_kutta_cash_karp54<S>());
    S prev = y;
    double xprev = x;
    while (y[1] > 0.0) {
        prev = y;
        xprev = x;
        dt = std::min(dt, 1e-3);
        while (stepper.try_step(rhs, y, x, dt) == ode::fail) {
        }
    }
    // linear interpolation of the v = 0 crossing
    const double xc = xprev + (x - xprev) * prev[1] / (prev[1] - y[1]);
    CHECK(time_map(u0, lam) == doctest::Approx(xc).epsilon(1e-6));
}

TEST_CASE("decay identity on the wells")
{
    const auto w = build_weight(1, 0.5, 0.0);
    Discretization d(w, build_uniform_mesh(500));

    const Profile zero(d.size(), 0.0);
    auto z = check_decay_identity(d, zero, -100.0, 0);
    CHECK(z.lhs == 0.0);
    CHECK(z.rhs == 0.0);

    std::vector<double> integrals;
    for (double lam : {-100.0, -300.0, -1000.0}) {
        CAPTURE(lam);
        const auto census = mask_census(d, lam);
        REQUIRE(census.size() == 3);
        for (const auto& e : census) {
            const auto r = check_decay_identity(d, e.u, lam, 0);
            if (lam == -100.0)
                CHECK(r.residual <= 2e-2);
        }
        integrals.push_back(std::abs(check_decay_identity(d, census.back().u, lam, 0).lhs));
    }
    CHECK(integrals[1] < integrals[0]);
    CHECK(integrals[2] < integrals[1]);

    for (const auto& t : shoot_count(w, -100.0).solutions)
        CHECK(check_decay_identity(w, t, 0).residual <= 2e-2);

    auto bad = mask_census(d, -100.0).front().u;
    bad[10] += 1.0;
    CHECK_THROWS_AS(check_decay_identity(d, bad, -100.0, 0), Error);
    CHECK_THROWS_AS(check_decay_identity(Discretization(build_weight(1, 0.5, 0.3), build_uniform_mesh(50)),
                                         Profile(50, 0.0), -1.0, 0),
                    Error);
}
