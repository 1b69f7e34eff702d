#pragma once

#include <span>
#include <vector>

#include "nehari/discretize.hpp"

namespace nehari {

struct NewtonOptions {
    double tol = 1e-4;             // Euclidean norm of the residual
    int max_iters = 25;
    double divergence_factor = 1e6;
    double singular_pivot = 1e-14; // relative to the Jacobian's infinity norm
};

enum class NewtonStatus { Converged, MaxIterations, Diverged, Singular };

const char* to_string(NewtonStatus s) noexcept;

/// A point (lambda, u) of the continuation unknown y = (u, lambda).
struct AugmentedState {
    double lambda = 0.0;
    Profile u;
};

/// Unit direction in (u, lambda) space.
struct Tangent {
    std::vector<double> du;
    double dlambda = 0.0;

    double dot(const Tangent& o) const;
    double norm() const;
    void normalize();
    Tangent operator-() const;
};

struct NewtonResult {
    AugmentedState state;
    NewtonStatus status = NewtonStatus::MaxIterations;
    int iterations = 0;
    double residual_norm = 0.0;
    std::vector<double> increments;  // ||delta_k||_2 per iteration

    bool converged() const { return status == NewtonStatus::Converged; }
};

/// Newton on F(lambda, .) = 0 at fixed lambda with tridiagonal solves.
NewtonResult newton_fixed_lambda(const Discretization& d, double lambda, Profile u0,
                                 const NewtonOptions& opt = {});

/// [F(y); t.du.(u - u_prev) + t.dlambda (lambda - lambda_prev) - ds]
std::vector<double> augmented_residual(const Discretization& d, const AugmentedState& y,
                                       const AugmentedState& y_prev, const Tangent& t, double ds);

struct BorderedSolution {
    std::vector<double> x;   // length N+1, lambda component last
    double schur = 0.0;      // t.dlambda - t.du . J^{-1} b_col (block path only)
    bool fallback = false;   // full bordered factorization was needed
};

/// Solves [[J, b_col], [t.du^T, t.dlambda]] x = rhs by block elimination, or by
/// pivoted elimination of the whole bordered matrix when J is (nearly)
/// singular or the Schur complement is degenerate. Throws Singular when the
/// bordered matrix itself is singular.
BorderedSolution bordered_solve(const BandedJacobian& j, std::span<const double> b_col,
                                const Tangent& t, std::span<const double> rhs);

/// Sign of det([[J, b_col], [t.du^T, t.dlambda]]), from the pivoted bordered factorization.
int bordered_det_sign(const BandedJacobian& j, std::span<const double> b_col, const Tangent& t);

/// Newton on the augmented system starting from `guess`.
NewtonResult newton_augmented(const Discretization& d, AugmentedState guess,
                              const AugmentedState& y_prev, const Tangent& t, double ds,
                              const NewtonOptions& opt = {});

double norm2(std::span<const double> v);

}  // namespace nehari
