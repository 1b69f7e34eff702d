#pragma once

#include <optional>
#include <utility>
#include <vector>

namespace nehari {

/// Open interval (left, right) on which the weight takes its depressed value.
struct Interval {
    double left = 0.0;
    double right = 0.0;

    double length() const { return right - left; }
    double center() const { return 0.5 * (left + right); }
};

/// Piecewise-constant weight: `eps` inside each interval, 1 elsewhere on [0,1].
///
/// Intervals all share the length `h`, are pairwise disjoint, lie in (0,1) and
/// (unless built with `require_symmetry = false`) are mirror images about 0.5.
class Weight {
public:
    Weight(int kappa, double h, double eps, std::vector<Interval> intervals, bool symmetric);

    int kappa() const { return kappa_; }
    double h() const { return h_; }
    double eps() const { return eps_; }
    bool symmetric() const { return symmetric_; }
    const std::vector<Interval>& intervals() const { return intervals_; }

    /// eps strictly inside an interval, 1 otherwise (endpoints included).
    double operator()(double x) const;

    /// Total length of the depressed set.
    double depressed_measure() const { return kappa_ * h_; }

private:
    int kappa_;
    double h_;
    double eps_;
    bool symmetric_;
    std::vector<Interval> intervals_;
};

/// Standard centers: {0.5}, {0.25, 0.75}, {1/6, 1/2, 5/6}; for larger kappa the
/// equispaced centers (2i-1)/(2 kappa).
std::vector<double> default_centers(int kappa);

Weight build_weight(int kappa, double h, double eps,
                    const std::optional<std::vector<double>>& centers = std::nullopt,
                    bool require_symmetry = true);

/// Throws a domain error for x outside [0,1].
double eval_weight(const Weight& w, double x);

}  // namespace nehari
