#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>

#include "nehari/discretize.hpp"
#include "nehari/error.hpp"

using namespace nehari;

namespace {

Profile sample(const Mesh& m, auto&& f)
{
    Profile u;
    for (double x : m.interior_nodes())
        u.push_back(f(x));
    return u;
}

// Reference residual in extended precision, written directly from the stencil
// formula, so central differences are not swamped by cancellation in -L[u].
std::vector<long double> reference_residual(const Mesh& m, const std::vector<double>& a, double lambda,
                                            const std::vector<long double>& u)
{
    const auto& x = m.nodes();
    const std::size_t n = u.size();
    std::vector<long double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
        const long double hl = static_cast<long double>(x[i + 1]) - x[i];
        const long double hr = static_cast<long double>(x[i + 2]) - x[i + 1];
        const long double ul = i > 0 ? u[i - 1] : 0.0L;
        const long double ur = i + 1 < n ? u[i + 1] : 0.0L;
        const long double lap = 2 * ul / (hl * (hl + hr)) - 2 * u[i] / (hl * hr) + 2 * ur / (hr * (hl + hr));
        r[i] = -lap - lambda * u[i] - a[i] * u[i] * u[i] * u[i];
    }
    return r;
}

}  // namespace

TEST_CASE("residual by hand on N=3")
{
    auto w = build_weight(1, 0.1, 1.0);  // a == 1 everywhere
    auto m = build_uniform_mesh(3);
    const auto r = residual(w, m, 0.0, Profile{1.0, 1.0, 1.0});
    REQUIRE(r.size() == 3);
    CHECK(r[0] == doctest::Approx(15.0).epsilon(1e-14));
    CHECK(r[1] == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(r[2] == doctest::Approx(15.0).epsilon(1e-14));

    const auto z = residual(w, m, 3.7, Profile(3, 0.0));
    for (double v : z)
        CHECK(v == 0.0);
    CHECK_THROWS_AS(residual(w, m, 0.0, Profile(4, 1.0)), Error);
}

TEST_CASE("sine samples are eigenvectors of the uniform operator")
{
    const std::size_t n = 200;
    auto w = build_weight(1, 0.3, 0.0);
    auto m = build_uniform_mesh(n);
    Discretization d(w, m);
    const auto u = sample(m, [&](double x) { return std::sin(std::numbers::pi * x); });
    const auto r = d.residual(toeplitz_eigenvalue(n, 1), u);
    for (std::size_t i = 0; i < n; ++i)
        CHECK(std::abs(r[i] + d.nodal_weight()[i] * u[i] * u[i] * u[i]) <= 1e-9);
}

TEST_CASE("jacobian matches central differences")
{
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    auto w = build_weight(2, 0.2, 0.3);
    for (auto m : {build_uniform_mesh(60), build_refined_mesh(w, 0.02, 0.004)}) {
        Discretization d(w, m);
        const std::size_t n = d.size();
        double worst = 0.0;
        for (int sample_id = 0; sample_id < 100; ++sample_id) {
            const double lambda = 50.0 * U(rng);
            const double a1 = 3 * U(rng), a2 = 3 * U(rng), f = 1 + 3 * std::abs(U(rng));
            Profile u(n), v(n);
            const auto x = m.interior_nodes();
            for (std::size_t i = 0; i < n; ++i) {
                u[i] = a1 * std::sin(std::numbers::pi * x[i]) + a2 * std::sin(f * std::numbers::pi * x[i]);
                v[i] = std::cos(2.0 * x[i] + a2) * std::sin(std::numbers::pi * x[i]);
            }
            const auto jv = d.jacobian(lambda, u).apply(v);
            double unorm = 0.0;
            for (double e : u)
                unorm = std::max(unorm, std::abs(e));
            const long double step = 1e-6L * (1.0L + unorm);
            std::vector<long double> up(n), um(n);
            for (std::size_t i = 0; i < n; ++i) {
                up[i] = u[i] + step * v[i];
                um[i] = u[i] - step * v[i];
            }
            const auto& a = d.nodal_weight();
            const auto rp = reference_residual(m, a, lambda, up), rm = reference_residual(m, a, lambda, um);
            // The reference residual agrees with the library one.
            std::vector<long double> ul(u.begin(), u.end());
            const auto r_ref = reference_residual(m, a, lambda, ul);
            const auto r_lib = d.residual(lambda, u);
            const double rounding = 1e-14 * d.laplacian().norm_inf() * (1.0 + unorm);
            for (std::size_t i = 0; i < n; ++i)
                CHECK(std::abs(static_cast<double>(r_ref[i]) - r_lib[i]) <= rounding);
            double num = 0.0, den = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double fd = static_cast<double>((rp[i] - rm[i]) / (2.0L * step));
                num = std::max(num, std::abs(fd - jv[i]));
                den = std::max(den, std::abs(jv[i]));
            }
            worst = std::max(worst, num / den);
        }
        CHECK(worst <= 1e-6);
    }
}

TEST_CASE("linear jacobian is Toeplitz on the uniform mesh")
{
    const std::size_t n = 9;
    auto j = jacobian(build_weight(1, 0.3, 0.0), build_uniform_mesh(n), 0.0, Profile(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        CHECK(j.diag[i] == doctest::Approx(200.0).epsilon(1e-13));
    for (std::size_t i = 0; i + 1 < n; ++i) {
        CHECK(j.sub[i] == doctest::Approx(-100.0).epsilon(1e-13));
        CHECK(j.sup[i] == doctest::Approx(-100.0).epsilon(1e-13));
    }
    auto j2 = jacobian(build_weight(1, 0.3, 0.5), build_uniform_mesh(n), 2.5, Profile(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        CHECK(j2.diag[i] == doctest::Approx(197.5).epsilon(1e-13));
}

TEST_CASE("reflection equivariance of the residual")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(0.0, 2.0);
    auto w = build_weight(3, 0.1, 0.2);
    for (auto m : {build_uniform_mesh(101), build_uniform_mesh(100), build_refined_mesh(w, 0.01, 0.001)}) {
        Discretization d(w, m);
        Profile u(d.size());
        for (auto& e : u)
            e = U(rng);
        const auto r = d.residual(-17.0, u);
        const auto rr = d.residual(-17.0, Discretization::reflect(u));
        const auto rref = Discretization::reflect(r);
        double scale = 0.0;
        for (double e : r)
            scale = std::max(scale, std::abs(e));
        for (std::size_t i = 0; i < r.size(); ++i)
            CHECK(std::abs(rr[i] - rref[i]) <= 1e-13 * scale);
    }
}

TEST_CASE("discrete L2 norm")
{
    auto m = build_uniform_mesh(10);
    CHECK(discrete_l2_norm(m, Profile(10, 0.0)) == 0.0);
    CHECK(discrete_l2_norm(m, Profile(10, 1.0)) == doctest::Approx(std::sqrt(10.0 / 11.0)).epsilon(1e-15));

    auto m500 = build_uniform_mesh(500);
    const auto s = sample(m500, [](double x) { return std::sin(std::numbers::pi * x); });
    CHECK(std::abs(discrete_l2_norm(m500, s) - 1.0 / std::sqrt(2.0)) <= 2e-3);
    CHECK(discrete_l2_norm(m500, s) == discrete_l2_norm(m500, Discretization::reflect(s)));
    CHECK_THROWS_AS(discrete_l2_norm(m, Profile(9, 1.0)), Error);
}

TEST_CASE("toeplitz eigenvalues against a dense eigensolver")
{
    for (std::size_t n : {10u, 57u, 100u}) {
        auto lap = Discretization(build_weight(1, 0.3, 0.0), build_uniform_mesh(n)).laplacian();
        Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            a(i, i) = lap.diag[i];
            if (i + 1 < n) {
                a(i, i + 1) = lap.sup[i];
                a(i + 1, i) = lap.sub[i];
            }
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
        for (std::size_t k = 1; k <= n; ++k)
            CHECK(toeplitz_eigenvalue(n, k) == doctest::Approx(es.eigenvalues()(k - 1)).epsilon(1e-11));
    }
    for (std::size_t n : {1u, 5u, 300u}) {
        const double top = toeplitz_eigenvalue(n, n);
        CHECK(top < 4.0 * (n + 1.0) * (n + 1.0));
        CHECK(top == doctest::Approx(2.0 * (n + 1.0) * (n + 1.0) * (1 + std::cos(std::numbers::pi / (n + 1.0)))));
    }
    CHECK_THROWS_AS(toeplitz_eigenvalue(10, 0), Error);
    CHECK_THROWS_AS(toeplitz_eigenvalue(10, 11), Error);
}

TEST_CASE("principal eigenvalue converges to pi^2 from below")
{
    double prev = 1e300;
    for (std::size_t n : {100u, 200u, 500u, 800u, 1000u, 2000u}) {
        const double gap = std::abs(toeplitz_eigenvalue(n, 1) - std::numbers::pi * std::numbers::pi);
        CHECK(gap < prev);
        prev = gap;
        if (n <= 500) {
            Discretization d(build_weight(1, 0.3, 0.0), build_uniform_mesh(n));
            CHECK(d.principal_eigenvalue() == doctest::Approx(toeplitz_eigenvalue(n, 1)).epsilon(1e-12));
        }
    }
    for (std::size_t k = 1; k <= 4; ++k)
        CHECK(toeplitz_eigenvalue(4000, k) ==
              doctest::Approx(k * k * std::numbers::pi * std::numbers::pi).epsilon(1e-5));
}
