#include "doctest.h"

#include <cmath>
#include <numeric>

#include "nehari/error.hpp"
#include "nehari/mesh.hpp"

using namespace nehari;

namespace {

std::size_t count_inside(const Mesh& m, double a, double b)
{
    std::size_t c = 0;
    for (double x : m.nodes())
        c += (x > a && x < b) ? 1 : 0;
    return c;
}

bool is_node(const Mesh& m, double x)
{
    for (double y : m.nodes()) {
        if (std::abs(y - x) <= 1e-15)
            return true;
    }
    return false;
}

void check_palindromic(const Mesh& m)
{
    const auto h = mesh_spacings(m);
    for (std::size_t i = 0; i < h.size(); ++i)
        CHECK(h[i] == h[h.size() - 1 - i]);
    CHECK(m.symmetry_residual() == 0.0);
    double s = std::accumulate(h.begin(), h.end(), 0.0);
    CHECK(std::abs(s - 1.0) <= 1e-15);
    for (double v : h)
        CHECK(v > 0.0);
}

}  // namespace

TEST_CASE("uniform meshes")
{
    auto m1 = build_uniform_mesh(1);
    REQUIRE(m1.nodes().size() == 3);
    CHECK(m1[1] == 0.5);

    auto m3 = build_uniform_mesh(3);
    CHECK(m3.nodes() == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
    CHECK(mesh_spacings(m3) == std::vector<double>{0.25, 0.25, 0.25, 0.25});

    auto m500 = build_uniform_mesh(500);
    CHECK(m500.nodes().size() == 502);
    CHECK(m500.interior() == 500);
    const auto h = mesh_spacings(m500);
    CHECK(*std::max_element(h.begin(), h.end()) == doctest::Approx(1.0 / 501).epsilon(1e-12));
    for (std::size_t i = 0; i < m500.nodes().size(); ++i)
        CHECK(m500[i] == doctest::Approx(i / 501.0).epsilon(1e-15));

    for (std::size_t n : {2u, 4u, 7u, 100u, 501u, 1000u})
        check_palindromic(build_uniform_mesh(n));

    CHECK_THROWS_AS(build_uniform_mesh(0), Error);
}

TEST_CASE("mesh validation")
{
    CHECK_THROWS_AS(Mesh({0.0, 1.0}), Error);
    CHECK_THROWS_AS(Mesh({0.0, 0.6, 0.5, 1.0}), Error);
    CHECK_THROWS_AS(Mesh({0.1, 0.5, 1.0}), Error);
}

TEST_CASE("refined mesh around a tiny well")
{
    auto w = build_weight(1, 1e-5, 0.0);
    auto m = build_refined_mesh(w, 1e-3, 1e-6, 1e-4);
    check_palindromic(m);
    const double n = static_cast<double>(m.interior());
    CHECK(std::abs(n - 1181.0) <= 0.05 * 1181.0);
    const auto& iv = w.intervals()[0];
    CHECK(count_inside(m, iv.left, iv.right) >= 9);
    CHECK(is_node(m, iv.left));
    CHECK(is_node(m, iv.right));
    CHECK(is_node(m, 0.5));
}

TEST_CASE("refined mesh properties")
{
    for (int kappa = 1; kappa <= 3; ++kappa) {
        auto w = build_weight(kappa, 0.05, 0.0);
        auto m = build_refined_mesh(w, 1e-2, 1e-3);
        check_palindromic(m);
        for (const auto& iv : w.intervals()) {
            CHECK(is_node(m, iv.left));
            CHECK(is_node(m, iv.right));
        }
        const auto h = mesh_spacings(m);
        CHECK(*std::max_element(h.begin(), h.end()) <= 1e-2 * (1 + 1e-9));
        // Fine zone spacing within rounding of the target.
        for (std::size_t i = 0; i + 1 < m.nodes().size(); ++i) {
            const double mid = 0.5 * (m[i] + m[i + 1]);
            for (const auto& iv : w.intervals()) {
                if (mid > iv.left && mid < iv.right)
                    CHECK(h[i] <= 1e-3 * (1 + 1e-9));
            }
        }
    }
}

TEST_CASE("refinement degenerates to the uniform mesh")
{
    auto w = build_weight(1, 0.5, 0.0);
    auto r = build_refined_mesh(w, 1.0 / 501, 1.0 / 501, 0.0);
    auto u = build_uniform_mesh(500);
    CHECK(r.nodes() == u.nodes());
}

TEST_CASE("refined mesh errors")
{
    auto w = build_weight(1, 0.01, 0.0);
    try {
        build_refined_mesh(w, 0.05, 0.02);
        FAIL("expected resolution error");
    }
    catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Resolution);
    }
    CHECK_THROWS_AS(build_refined_mesh(w, 1e-3, 1e-2), Error);
    CHECK_THROWS_AS(build_refined_mesh(w, 1e-2, 1e-3, -1.0), Error);
}
