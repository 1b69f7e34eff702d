#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nehari/continuation.hpp"

namespace nehari {

/// One bit per maximal interval where a = 1, left to right.
struct PeakMask {
    std::vector<bool> bits;

    static PeakMask from_string(const std::string& s);
    std::string to_string() const;
    PeakMask reflected() const;
    std::size_t count() const;
    bool operator==(const PeakMask&) const = default;
};

/// All 2^(kappa+1) - 1 nonzero masks, ordered by their binary value with the
/// leftmost interval as the least significant bit.
std::vector<PeakMask> enumerate_masks(int kappa);

/// u_i = amplitude sin(pi x_i)
Profile sine_seed(const Mesh& m, double amplitude);

/// Amplitude c for which c sin(pi x) is the first-order bifurcating solution at
/// lambda: c^2 = (lambda_1 - lambda) sum(phi^2) / sum(a phi^4).
double sine_amplitude(const Discretization& d, double lambda);

/// [beta_i, alpha_{i+1}], i = 0..kappa, with beta_0 = 0 and alpha_{kappa+1} = 1.
std::vector<Interval> support_intervals(const Weight& w);

/// Where a seeded bump sits inside its support interval. Inward and Outward
/// place it `edge_offset` decay lengths 1/sqrt(-lambda) from the well edge
/// nearer to or farther from x = 0.5; a domain boundary is never used as that
/// edge. Balanced solves the leading-order force balance between the walls,
/// the well edges and neighbouring peaks for all seeded bumps at once.
enum class PeakPlacement { Center, Inward, Outward, Balanced };

/// Sum of homoclinic bumps sqrt(-2 lambda) sech(sqrt(-lambda) (x - c_j)), one per
/// set bit, inside support interval j. Centered bumps are truncated to their
/// interval; edge bumps run on into the neighbouring well.
Profile peak_pattern_seed(const Weight& w, const Mesh& m, const PeakMask& mask, double lambda,
                          PeakPlacement placement = PeakPlacement::Center, double edge_offset = 1.0);

/// Unit translation modes sech tanh of each seeded bump, restricted to its interval.
std::vector<std::vector<double>> peak_translation_modes(const Weight& w, const Mesh& m, const PeakMask& mask,
                                                        double lambda,
                                                        PeakPlacement placement = PeakPlacement::Center,
                                                        double edge_offset = 1.0);

/// Newton at fixed lambda with the component of each step along `modes` held
/// at zero (a bordered system with one multiplier per mode) for at most
/// `pinned_iters` steps, then plain Newton from the result. Peaks far from
/// the walls are pinned only by exponentially weak forces, and the free
/// iteration tends to throw them across the interval.
NewtonResult pinned_newton(const Discretization& d, double lambda, Profile u0,
                           const std::vector<std::vector<double>>& modes, const NewtonOptions& opt = {},
                           int pinned_iters = 40);

/// Bumps inside the depressed intervals themselves (one bit per interval),
/// amplitude sqrt(-2 lambda / eps). Requires eps > 0.
Profile well_seed(const Weight& w, const Mesh& m, const std::vector<bool>& wells, double lambda);

/// Strict local maxima of u at or above `rel_height` times max u.
std::vector<std::size_t> peak_indices(std::span<const double> u, double rel_height = 0.25);

/// Mask of the support intervals that contain a peak of u.
PeakMask peak_mask_of(const Discretization& d, std::span<const double> u, double rel_height = 0.25);

struct DedupOptions {
    double norm_tol = 1e-3;     // |norm difference|
    double profile_tol = 1e-4;  // max-difference, relative to max(1, max |u|)
    NewtonOptions newton;
};

/// Same solution within the dedup tolerances (both profiles on one mesh).
bool same_solution(const Discretization& d, std::span<const double> a, std::span<const double> b,
                   const DedupOptions& opt = {});

/// Whether (lambda, u) already lies on one of `branches`: the bracketing pair
/// of stored points is interpolated and corrected at lambda, then compared.
bool on_known_branch(const Discretization& d, double lambda, std::span<const double> u,
                     const std::vector<Branch>& branches, const DedupOptions& opt = {});

struct IsolaOptions {
    NewtonOptions newton;
    DedupOptions dedup;
    bool require_positive = true;
};

/// Newton from `seed` at lambda; the converged point is returned tagged
/// branch_start unless it is not positive or lies on a known branch.
std::optional<SolutionPoint> find_new_solution(const Discretization& d, double lambda, Profile seed,
                                               const std::vector<Branch>& known,
                                               const IsolaOptions& opt = {},
                                               std::string* diagnostic = nullptr);

/// Solution with peak mask `mask` (as in mask_census), screened like find_new_solution.
std::optional<SolutionPoint> find_isola(const Discretization& d, double lambda, const PeakMask& mask,
                                        const std::vector<Branch>& known, const IsolaOptions& opt = {},
                                        std::string* diagnostic = nullptr);

struct CensusEntry {
    PeakMask mask;
    Profile u;
    double norm = 0.0;
    std::string seed;  // "balanced" or "center"
};

/// One solution per mask at lambda: pinned Newton from the balanced seed, then
/// plain Newton from the centered seed. A solution counts only if it is
/// positive, its peaks sit exactly on the mask's intervals and it differs from
/// every solution already listed. Masks are tried concurrently; the result is
/// in mask order.
std::vector<CensusEntry> mask_census(const Discretization& d, double lambda, const std::vector<PeakMask>& masks,
                                     const DedupOptions& opt = {});

/// mask_census over enumerate_masks(kappa).
std::vector<CensusEntry> mask_census(const Discretization& d, double lambda, const DedupOptions& opt = {});

}  // namespace nehari
