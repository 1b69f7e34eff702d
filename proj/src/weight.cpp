#include "nehari/weight.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nehari/error.hpp"

namespace nehari {

const char* to_string(ErrorKind kind) noexcept
{
    switch (kind) {
    case ErrorKind::Overlap: return "overlap";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Symmetry: return "symmetry";
    case ErrorKind::Size: return "size";
    case ErrorKind::Resolution: return "resolution";
    case ErrorKind::MeshMismatch: return "mesh mismatch";
    case ErrorKind::Index: return "index";
    case ErrorKind::Dimension: return "dimension";
    case ErrorKind::Singular: return "singular";
    case ErrorKind::RankDeficient: return "rank deficiency";
    case ErrorKind::BracketInvalid: return "invalid bracket";
    case ErrorKind::CorrectorFailure: return "corrector";
    case ErrorKind::MaskMismatch: return "mask mismatch";
    case ErrorKind::NotASolution: return "not a solution";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
    }
    return "unknown";
}

Weight::Weight(int kappa, double h, double eps, std::vector<Interval> intervals, bool symmetric)
    : kappa_(kappa), h_(h), eps_(eps), symmetric_(symmetric), intervals_(std::move(intervals))
{
}

double Weight::operator()(double x) const
{
    for (const auto& iv : intervals_) {
        if (x > iv.left && x < iv.right)
            return eps_;
    }
    return 1.0;
}

std::vector<double> default_centers(int kappa)
{
    switch (kappa) {
    case 1: return {0.5};
    case 2: return {0.25, 0.75};
    case 3: return {1.0 / 6.0, 0.5, 5.0 / 6.0};
    default: break;
    }
    std::vector<double> c(static_cast<std::size_t>(kappa));
    for (int i = 0; i < kappa; ++i)
        c[static_cast<std::size_t>(i)] = (2.0 * i + 1.0) / (2.0 * kappa);
    return c;
}

Weight build_weight(int kappa, double h, double eps,
                    const std::optional<std::vector<double>>& centers, bool require_symmetry)
{
    if (kappa < 1)
        throw Error(ErrorKind::Domain, "kappa must be >= 1");
    if (!(h > 0.0))
        throw Error(ErrorKind::Domain, "interval length h must be positive");
    if (!(eps >= 0.0 && eps <= 1.0))
        throw Error(ErrorKind::Domain, "eps must lie in [0,1]");

    std::vector<double> c = centers ? *centers : default_centers(kappa);
    if (static_cast<int>(c.size()) != kappa)
        throw Error(ErrorKind::Domain, "expected one center per interval");
    std::sort(c.begin(), c.end());

    bool symmetric = true;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (std::abs(c[i] + c[c.size() - 1 - i] - 1.0) > 1e-12)
            symmetric = false;
    }
    if (!symmetric && require_symmetry)
        throw Error(ErrorKind::Symmetry, "centers are not symmetric about 0.5");

    std::vector<Interval> iv;
    iv.reserve(c.size());
    const std::size_t n = c.size();
    // Left-half endpoints are rounded to multiples of 2^-53 so that 1 - x is exact
    // and the mirrored intervals reflect back onto them bit for bit.
    auto snap = [symmetric](double x) {
        constexpr double scale = 9007199254740992.0;  // 2^53
        return symmetric ? std::nearbyint(x * scale) / scale : x;
    };
    for (std::size_t i = 0; i < n; ++i) {
        Interval cur{snap(c[i] - 0.5 * h), snap(c[i] + 0.5 * h)};
        // Mirror the right half so reflection about 0.5 is exact in floating point.
        if (symmetric && 2 * i >= n && 2 * i + 1 != n) {
            const auto& m = iv[n - 1 - i];
            cur = {1.0 - m.right, 1.0 - m.left};
        }
        else if (symmetric && 2 * i + 1 == n) {
            cur.right = 1.0 - cur.left;
        }
        if (!(cur.left > 0.0 && cur.right < 1.0)) {
            std::ostringstream os;
            os << "interval (" << cur.left << ", " << cur.right << ") leaves (0,1)";
            throw Error(ErrorKind::Domain, os.str());
        }
        if (!iv.empty() && !(cur.left > iv.back().right))
            throw Error(ErrorKind::Overlap, "vanishing intervals touch or overlap");
        iv.push_back(cur);
    }
    return Weight(kappa, h, eps, std::move(iv), symmetric);
}

double eval_weight(const Weight& w, double x)
{
    if (!(x >= 0.0 && x <= 1.0))
        throw Error(ErrorKind::Domain, "x outside [0,1]");
    return w(x);
}

}  // namespace nehari
