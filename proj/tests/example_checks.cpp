// Documented examples checked literally. Several disagree with the computation;
// see the project notes for the analysis.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "nehari/diagram.hpp"

using namespace nehari;

namespace {

Branch main_branch(const Discretization& d, double lambda_min)
{
    const double lam = d.principal_eigenvalue() - 0.1;
    auto r = newton_fixed_lambda(d, lam, sine_seed(d.mesh(), sine_amplitude(d, lam)));
    REQUIRE(r.converged());
    ContinuationConfig cfg;
    cfg.lambda_min = lambda_min;
    return continue_branch(d, make_point(d, lam, r.state.u, PointTag::BranchStart),
                           initial_tangent(d, {lam, r.state.u}, -1), cfg);
}

}  // namespace

TEST_CASE("autonomous branch: norm ~ C (pi^2 - lambda)^p with p = 0.5 +- 0.05 on [-100, 0]")
{
    Discretization d(build_weight(1, 0.1, 1.0), build_uniform_mesh(500));
    const auto b = main_branch(d, -100.0);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (const auto& p : b.points) {
        if (p.lambda > 0.0 || p.lambda < -100.0)
            continue;
        const double x = std::log(std::numbers::pi * std::numbers::pi - p.lambda), y = std::log(p.l2norm);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    REQUIRE(n > 5);
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CAPTURE(slope);
    CHECK(std::abs(slope - 0.5) <= 0.05);
}

TEST_CASE("three wells, h = 0.3: first branch point near -0.7296")
{
    RunConfig c;
    c.kappa = 3;
    c.h = 0.3;
    c.continuation.lambda_min = -100.0;
    const auto rows = run_h_sweep(c, {0.3});
    REQUIRE(rows.size() == 1);
    REQUIRE(rows[0].lambda_b.has_value());
    CAPTURE(*rows[0].lambda_b);
    CHECK(std::abs(*rows[0].lambda_b - -0.7296) <= 5e-2);
}

TEST_CASE("eps = 0.3: a two-peak seed at lambda = -1100 converges to an isola solution")
{
    Discretization d(build_weight(1, 0.1, 0.3), build_uniform_mesh(500));
    const std::vector<Branch> known{main_branch(d, -1300.0)};
    std::string why;
    const auto hit = find_isola(d, -1100.0, PeakMask::from_string("11"), known, {}, &why);
    CHECK_MESSAGE(hit.has_value(), why);
}

TEST_CASE("eps = 0.3: isola continuation seeded at -1100 closes with minimum lambda near -1111.65")
{
    Discretization d(build_weight(1, 0.1, 0.3), build_uniform_mesh(500));
    const auto r = newton_fixed_lambda(d, -1100.0, well_seed(d.weight(), d.mesh(), {true}, -1100.0));
    REQUIRE(r.converged());
    const auto known = main_branch(d, -1300.0);
    REQUIRE_FALSE(on_known_branch(d, -1100.0, r.state.u, {known}));
    ContinuationConfig cfg;
    cfg.lambda_min = -5000.0;
    const auto b = continue_both_ways(d, make_point(d, -1100.0, r.state.u), cfg);
    CHECK(b.stop == StopReason::ClosedLoop);
    double lo = 0.0;
    for (const auto& p : b.points)
        lo = std::min(lo, p.lambda);
    CHECK(std::abs(lo - -1111.65254) <= 0.01 * 1111.65254);
}

TEST_CASE("three wells, h = 0.3: 15 solutions at lambda = -3000")
{
    Discretization d(build_weight(3, 0.3, 0.0), build_uniform_mesh(500));
    CHECK(mask_census(d, -3000.0).size() == 15);
}
