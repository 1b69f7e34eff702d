#include "nehari/mesh.hpp"

#include <algorithm>
#include <cmath>

#include "nehari/error.hpp"

namespace nehari {

namespace {

// Left-half nodes are rounded to multiples of 2^-53 so that 1 - x is exact and
// the mirrored mesh satisfies x_i + x_{N+1-i} == 1 bit for bit.
double snap(double x)
{
    constexpr double scale = 9007199254740992.0;  // 2^53
    return std::nearbyint(x * scale) / scale;
}

// Mirror a strictly increasing node list on [0, 0.5] (0 included; 0.5 included
// iff `has_center`) into a full mesh on [0, 1].
Mesh mirror_left_half(std::vector<double> left, bool has_center)
{
    for (auto& x : left)
        x = snap(x);
    std::vector<double> nodes = left;
    const std::size_t top = has_center ? left.size() - 1 : left.size();
    nodes.reserve(2 * left.size());
    for (std::size_t k = top; k-- > 0;)
        nodes.push_back(1.0 - left[k]);
    return Mesh(std::move(nodes));
}

}  // namespace

Mesh::Mesh(std::vector<double> nodes) : nodes_(std::move(nodes))
{
    if (nodes_.size() < 3)
        throw Error(ErrorKind::Size, "a mesh needs at least one interior node");
    if (nodes_.front() != 0.0 || nodes_.back() != 1.0)
        throw Error(ErrorKind::Domain, "mesh endpoints must be exactly 0 and 1");
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
        if (!(nodes_[i] > nodes_[i - 1]))
            throw Error(ErrorKind::Domain, "mesh nodes must be strictly increasing");
    }
}

std::vector<double> Mesh::interior_nodes() const
{
    return {nodes_.begin() + 1, nodes_.end() - 1};
}

double Mesh::symmetry_residual() const
{
    const std::size_t last = nodes_.size() - 1;
    double r = 0.0;
    for (std::size_t i = 0; i <= last; ++i)
        r = std::max(r, std::abs(nodes_[i] + nodes_[last - i] - 1.0));
    return r;
}

Mesh build_uniform_mesh(std::size_t n_interior)
{
    if (n_interior < 1)
        throw Error(ErrorKind::Size, "uniform mesh needs at least one interior node");
    const double denom = static_cast<double>(n_interior + 1);
    const bool has_center = (n_interior % 2) == 1;
    const std::size_t half = has_center ? (n_interior + 1) / 2 : n_interior / 2 + 1;
    std::vector<double> left;
    left.reserve(half + 1);
    for (std::size_t i = 0; i < half; ++i)
        left.push_back(static_cast<double>(i) / denom);
    if (has_center)
        left.push_back(0.5);
    return mirror_left_half(std::move(left), has_center);
}

Mesh build_refined_mesh(const Weight& w, double coarse_dx, double fine_dx, double pad)
{
    if (!(fine_dx > 0.0 && fine_dx <= coarse_dx))
        throw Error(ErrorKind::Domain, "need 0 < fine_dx <= coarse_dx");
    if (!(pad >= 0.0))
        throw Error(ErrorKind::Domain, "pad must be non-negative");
    if (fine_dx >= w.h())
        throw Error(ErrorKind::Resolution, "fine_dx must be smaller than the interval length");

    if (coarse_dx - fine_dx <= 1e-15 * coarse_dx) {
        const double cells = std::round(1.0 / coarse_dx);
        if (cells < 2.0)
            throw Error(ErrorKind::Resolution, "spacing too coarse for [0,1]");
        return build_uniform_mesh(static_cast<std::size_t>(cells) - 1);
    }

    struct Zone {
        double lo, hi;
    };
    std::vector<Zone> zones;
    std::vector<double> breaks{0.0, 0.5};
    auto add_break = [&](double x) {
        if (x > 0.0 && x < 0.5)
            breaks.push_back(x);
    };
    for (const auto& iv : w.intervals()) {
        if (iv.left >= 0.5)
            continue;
        zones.push_back({iv.left - pad, iv.right + pad});
        add_break(iv.left);
        add_break(iv.right);
        add_break(iv.left - pad);
        add_break(iv.right + pad);
    }
    std::sort(breaks.begin(), breaks.end());
    breaks.erase(std::unique(breaks.begin(), breaks.end(),
                             [&](double a, double b) { return b - a < 0.25 * fine_dx; }),
                 breaks.end());
    if (breaks.back() != 0.5)
        breaks.back() = 0.5;

    auto is_fine = [&](double a, double b) {
        const double mid = 0.5 * (a + b);
        return std::any_of(zones.begin(), zones.end(),
                           [&](const Zone& z) { return mid > z.lo && mid < z.hi; });
    };

    const std::size_t nseg = breaks.size() - 1;
    std::vector<bool> fine(nseg);
    for (std::size_t s = 0; s < nseg; ++s)
        fine[s] = is_fine(breaks[s], breaks[s + 1]);

    const double ratio = std::pow(coarse_dx / fine_dx, 1.0 / 6.0);
    auto graded = [&](double len) {
        // Up to five geometrically growing cells leaving the fine zone.
        std::vector<double> cells;
        double size = fine_dx, total = 0.0;
        for (int k = 0; k < 5; ++k) {
            size *= ratio;
            if (size >= coarse_dx || total + size > 0.25 * len)
                break;
            cells.push_back(size);
            total += size;
        }
        return cells;
    };

    std::vector<double> left{0.0};
    for (std::size_t s = 0; s < nseg; ++s) {
        const double a = breaks[s], b = breaks[s + 1], len = b - a;
        std::vector<double> cells;
        if (fine[s]) {
            const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(len / fine_dx - 1e-9)));
            cells.assign(n, len / static_cast<double>(n));
        }
        else {
            std::vector<double> lo_cells, hi_cells;
            if (s > 0 && fine[s - 1])
                lo_cells = graded(len);
            if (s + 1 < nseg && fine[s + 1])
                hi_cells = graded(len);
            double used = 0.0;
            for (double c : lo_cells)
                used += c;
            for (double c : hi_cells)
                used += c;
            const double rest = len - used;
            const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(rest / coarse_dx - 1e-9)));
            cells = lo_cells;
            cells.insert(cells.end(), n, rest / static_cast<double>(n));
            cells.insert(cells.end(), hi_cells.rbegin(), hi_cells.rend());
        }
        double x = a;
        for (std::size_t k = 0; k + 1 < cells.size(); ++k) {
            x += cells[k];
            left.push_back(x);
        }
        left.push_back(b);
    }
    return mirror_left_half(std::move(left), true);
}

Mesh build_refined_mesh(const Weight& w, double coarse_dx, double fine_dx)
{
    return build_refined_mesh(w, coarse_dx, fine_dx, 10.0 * fine_dx);
}

std::vector<double> mesh_spacings(const Mesh& m)
{
    const auto& x = m.nodes();
    std::vector<double> h(x.size() - 1);
    for (std::size_t i = 1; i < x.size(); ++i)
        h[i - 1] = x[i] - x[i - 1];
    return h;
}

}  // namespace nehari
