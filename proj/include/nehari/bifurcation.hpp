#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "nehari/continuation.hpp"

namespace nehari {

// det_sign(const BandedJacobian&) lives in tridiagonal.hpp.

/// Bisection on the sign of det(-L - lambda I) over [lo, hi] until the bracket
/// is narrower than `width_tol`; returns the bracket midpoint.
double bisect_linear_eigenvalue(const Discretization& d, double lo, double hi, double width_tol);

/// Consecutive point pairs (k, k+1) of a branch where the sign of the
/// augmented determinant flips (candidate branch points), and those where only
/// det J flips (folds).
struct SignChanges {
    std::vector<std::size_t> bifurcations;
    std::vector<std::size_t> folds;
};
SignChanges scan_sign_changes(const Branch& b);

struct LocateOptions {
    double tol = 1e-4;  // final lambda gap
    int max_bisections = 200;
    NewtonOptions newton;
};

/// Bisection in arclength between stored points `bracket.first` and
/// `bracket.second` (consecutive) on the sign of the augmented determinant, or
/// of det J when `use_fixed_jacobian` is set (folds).
BifurcationEvent locate_bifurcation(const Discretization& d, const Branch& b,
                                    std::pair<std::size_t, std::size_t> bracket,
                                    const LocateOptions& opt = {}, bool use_fixed_jacobian = false);

/// Unit right null vector estimate of J (inverse iteration).
std::vector<double> null_vector(const BandedJacobian& j, bool transpose = false);

struct SwitchOptions {
    std::optional<double> amplitude;  // default 0.01 (1 + |u_host|)
    int max_doublings = 3;
    NewtonOptions newton;
};

struct SwitchResult {
    AugmentedState plus;
    AugmentedState minus;
    double amplitude = 0.0;
    bool used_fallback = false;  // hyperplane-constrained correction was needed
};

/// Fixed-lambda Newton from host.u + amp v and host.u - amp v at
/// lambda_b - amp / 10, without any acceptance test.
std::pair<NewtonResult, NewtonResult> correct_predictors(const Discretization& d,
                                                         const BifurcationEvent& ev,
                                                         const SolutionPoint& host, double amp,
                                                         const NewtonOptions& opt = {});

/// Two states on the bifurcating branch, obtained by correcting host.u +/- amp v
/// at lambda_b - amp / 10 with fixed-lambda Newton, doubling amp while both
/// land back on the host branch. If every attempt does, the component along v
/// is pinned to +/- amp and lambda is left free instead. Throws
/// CorrectorFailure when that also fails.
SwitchResult switch_branch(const Discretization& d, const BifurcationEvent& ev,
                           const SolutionPoint& host, const SwitchOptions& opt = {});

}  // namespace nehari
