#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "nehari/mesh.hpp"
#include "nehari/tridiagonal.hpp"
#include "nehari/weight.hpp"

namespace nehari {

/// Interior node values u_1..u_N; the boundary values are zero.
using Profile = std::vector<double>;

/// Jacobian of the discrete residual with respect to u.
using BandedJacobian = Tridiagonal;

/// Three-point finite-difference discretization of
///   -u'' = lambda u + a(x) u^3,  u(0) = u(1) = 0
/// on a (possibly non-uniform) mesh, with a sampled at the nodes.
class Discretization {
public:
    Discretization(Weight w, Mesh m);

    const Weight& weight() const { return weight_; }
    const Mesh& mesh() const { return mesh_; }
    std::size_t size() const { return mesh_.interior(); }

    /// a(x_i), i = 1..N; nodes within rounding of an interval endpoint count as endpoints.
    const std::vector<double>& nodal_weight() const { return a_; }
    const std::vector<double>& x() const { return x_; }

    /// -L[u] - lambda u - a u^3
    std::vector<double> residual(double lambda, std::span<const double> u) const;
    BandedJacobian jacobian(double lambda, std::span<const double> u) const;
    /// -L, the discrete Dirichlet operator -D^2.
    BandedJacobian laplacian() const;

    /// ( sum_{i=1}^{N} (x_i - x_{i-1}) u_i^2 )^{1/2}
    double l2_norm(std::span<const double> u) const;

    /// Smallest eigenvalue of -L (the discrete counterpart of pi^2).
    double principal_eigenvalue() const;

    /// u reflected about 0.5 (i -> N+1-i).
    static Profile reflect(std::span<const double> u);

    void check_size(std::span<const double> u) const;

private:
    Weight weight_;
    Mesh mesh_;
    std::vector<double> x_;
    std::vector<double> a_;
    std::vector<double> lo_, mid_, hi_;  // L[u]_i = lo u_{i-1} + mid u_i + hi u_{i+1}
};

std::vector<double> residual(const Weight& w, const Mesh& m, double lambda, std::span<const double> u);
BandedJacobian jacobian(const Weight& w, const Mesh& m, double lambda, std::span<const double> u);
double discrete_l2_norm(const Mesh& m, std::span<const double> u);

/// 2 (N+1)^2 (1 + cos((N+1-k) pi / (N+1))): k-th eigenvalue of the uniform
/// second-difference matrix with N interior nodes.
double toeplitz_eigenvalue(std::size_t n, std::size_t k);

}  // namespace nehari
