#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "nehari/corrector.hpp"

namespace nehari {

enum class PointTag { Regular, Fold, Bifurcation, BranchStart };
enum class BranchSymmetry { Symmetric, AsymmetricLeft, AsymmetricRight, Unknown };
enum class EventKind { Pitchfork, Fold, Unclassified };
enum class StopReason {
    None,
    LambdaMin,
    LambdaMax,
    NormMax,
    MaxSteps,
    Stall,
    ClosedLoop,
    PositivityLost,
    NonexistenceBound,
    JoinedBranch,
};

const char* to_string(PointTag t) noexcept;
const char* to_string(BranchSymmetry s) noexcept;
const char* to_string(EventKind k) noexcept;
const char* to_string(StopReason r) noexcept;

struct SolutionPoint {
    double lambda = 0.0;
    Profile u;
    double l2norm = 0.0;
    PointTag tag = PointTag::Regular;
};

struct BifurcationEvent {
    double lambda_b = 0.0;
    EventKind kind = EventKind::Unclassified;
    std::vector<double> null_vector;  // unit, length N
    std::size_t branch_index = 0;     // stored point preceding the event
    double arclength = 0.0;           // offset from that point along its tangent
    Profile u;                        // solution at the event
    double sigma_min_rel = 0.0;       // smallest / largest singular value of J
    double fold_indicator = 0.0;      // |psi . u| / (|psi| |u|), psi the left null vector
};

struct Branch {
    std::vector<SolutionPoint> points;
    std::vector<std::pair<std::size_t, BifurcationEvent>> events;
    BranchSymmetry symmetry = BranchSymmetry::Unknown;

    // Per-point continuation data, parallel to `points`.
    std::vector<Tangent> tangents;
    std::vector<int> det_j;    // sign of det J(lambda, u)
    std::vector<int> det_aug;  // sign of det [[J, -u], [t]]

    StopReason stop = StopReason::None;
    std::string diagnostic;
    int steps = 0;
    int rejected = 0;
};

struct ContinuationConfig {
    double ds = 3.0;
    double ds_min = 0.01;
    double lambda_min = -3000.0;
    double lambda_max = std::numeric_limits<double>::infinity();
    double norm_max = 1e4;
    int max_steps = 20000;
    NewtonOptions newton;
    double positivity_tol = 1e-8;  // min_i u_i below -positivity_tol stops the branch
    double loop_tol = 1e-3;        // closed-loop distance in the (lambda, norm) plane
    int grow_after = 5;            // successes before the step is doubled

    void validate() const;
};

/// Unit null vector of [J | -u] at a converged point. Orientation: dlambda has
/// the sign of `direction_hint` when |dlambda| > 1e-10, otherwise the first
/// nonzero du component is positive. Throws RankDeficient at branch points.
Tangent initial_tangent(const Discretization& d, const AugmentedState& y, int direction_hint);

/// Same null vector, oriented to have positive inner product with `reference`.
Tangent initial_tangent(const Discretization& d, const AugmentedState& y, const Tangent& reference);

/// Tangent at y continuing the orientation of `previous` (t.previous > 0), plus
/// the sign of det [[J, -u], [previous]].
std::pair<Tangent, int> next_tangent(const Discretization& d, const AugmentedState& y,
                                     const Tangent& previous);

/// Pseudo-arclength continuation from `start` along `t0`.
Branch continue_branch(const Discretization& d, const SolutionPoint& start, const Tangent& t0,
                       const ContinuationConfig& cfg);

/// Indices where lambda turns back along the branch, with the turning value
/// refined by a quadratic fit in arclength through the three nearest points.
std::vector<std::pair<std::size_t, double>> fold_points(const Branch& b);

SolutionPoint make_point(const Discretization& d, double lambda, Profile u,
                         PointTag tag = PointTag::Regular);

/// max_i |u_i - u_{N+1-i}| relative to max_i |u_i|.
double asymmetry(std::span<const double> u);

BranchSymmetry classify_symmetry(const Discretization& d, const Branch& b);

}  // namespace nehari
