#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nehari/discretize.hpp"
#include "nehari/weight.hpp"

namespace nehari {

/// lambda u^2 / 2 + a u^4 / 4
double potential_energy(double lambda, double a_val, double u);

/// v^2 / 2 + potential_energy(lambda, a_val, u)
double phase_energy(double lambda, double a_val, double u, double v);

struct TrajectorySample {
    double x = 0.0;
    double u = 0.0;
    double v = 0.0;
};

enum class ShotStatus { Reached, LeftCone, BlowUp };
const char* to_string(ShotStatus s) noexcept;

/// Stretch of a shot on which a is constant.
struct TrajectoryPiece {
    double a = 1.0;
    std::size_t first = 0;  // sample indices, inclusive
    std::size_t last = 0;
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    std::vector<TrajectoryPiece> pieces;
    double v0 = 0.0;
    double lambda = 0.0;
    ShotStatus status = ShotStatus::Reached;
    std::optional<double> exit_x;  // where u first dropped below zero
    std::string diagnostic;

    const TrajectorySample& back() const { return samples.back(); }
};

/// Dormand-Prince 5(4) integration of u' = v, v' = -lambda u - a(x) u^3 from
/// (0, 0, v0) to x = 1, never stepping across an endpoint of a depressed
/// interval. Stops early when u < -1e-12 or |u| > 1e8.
Trajectory integrate_ivp(const Weight& w, double lambda, double v0, double step_tol = 1e-10);

/// Largest energy change within one constant-a piece, relative to that piece's
/// energy scale max(v^2/2 + |lambda| u^2/2 + a u^4/4).
double energy_drift(const Trajectory& t);

struct ShootOptions {
    std::optional<double> v0_max;  // default 2 max(-2 lambda, 4 pi^2)^(3/2)
    std::size_t grid_size = 400;
    double decades = 12.0;         // grid spans [v0_max 10^-decades, v0_max]
    double step_tol = 1e-10;
    double root_tol = 1e-10;
};

struct ShootResult {
    std::size_t count = 0;
    std::vector<double> roots;          // ascending
    std::vector<Trajectory> solutions;  // one per root
    std::vector<std::string> warnings;
    double v0_max = 0.0;
};

/// Positive solutions by shooting on v0 = u'(0). The miss function is u(1) for
/// shots that stay positive and -(1 - x_exit) for shots that leave the cone,
/// which is continuous where u(1) crosses zero. Sign changes on the log grid
/// are bisected; a limit whose exit point is not at x = 1 is discarded.
ShootResult shoot_count(const Weight& w, double lambda, const ShootOptions& opt = {});

/// Quarter period of an exterior orbit of -u'' = lambda u + u^3 from the
/// v-axis to (u0, 0), by quadrature after theta = sin(phi). Requires lambda < 0
/// and u0^2 > -2 lambda.
double time_map(double u0, double lambda);

/// pi / (2 sqrt(lambda + u0^2 / 2))
double time_map_bound(double u0, double lambda);

struct DecayIdentity {
    double lhs = 0.0;  // integral of u phi over the interval
    double rhs = 0.0;
    double residual = 0.0;  // |lhs - rhs| / (|rhs| + 1e-12)
};

/// For phi(x) = sin(pi (x - alpha) / h) on depressed interval `interval_index`
/// (eps = 0) compares the integral of u phi with the boundary term
/// (u(beta) phi'(beta) - u(alpha) phi'(alpha)) / (lambda - (pi/h)^2). `x` and `u`
/// sample the solution on [0, 1]; values at alpha and beta are interpolated.
DecayIdentity decay_identity(const Weight& w, std::span<const double> x, std::span<const double> u,
                             double lambda, std::size_t interval_index);

/// Same for an FD solution; throws NotASolution when its residual norm exceeds 10 newton_tol.
DecayIdentity check_decay_identity(const Discretization& d, std::span<const double> u, double lambda,
                                   std::size_t interval_index, double newton_tol = 1e-4);

/// Same for a shot.
DecayIdentity check_decay_identity(const Weight& w, const Trajectory& t, std::size_t interval_index);

}  // namespace nehari
