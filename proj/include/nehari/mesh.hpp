#pragma once

#include <cstddef>
#include <vector>

#include "nehari/weight.hpp"

namespace nehari {

/// Node set 0 = x_0 < x_1 < ... < x_N < x_{N+1} = 1, symmetric about 0.5.
class Mesh {
public:
    explicit Mesh(std::vector<double> nodes);

    /// Number of interior nodes N.
    std::size_t interior() const { return nodes_.size() - 2; }
    const std::vector<double>& nodes() const { return nodes_; }
    double operator[](std::size_t i) const { return nodes_[i]; }

    /// Interior abscissae x_1..x_N.
    std::vector<double> interior_nodes() const;

    /// max_i |x_i + x_{N+1-i} - 1|
    double symmetry_residual() const;

private:
    std::vector<double> nodes_;
};

Mesh build_uniform_mesh(std::size_t n_interior);

/// Locally refined mesh: spacing about `fine_dx` on [alpha_i - pad, beta_i + pad],
/// about `coarse_dx` elsewhere, with a geometric blend of at most five cells
/// between zones. Every interval endpoint is a node and 0.5 is pinned. When the
/// two spacings coincide the result is the uniform mesh with that spacing.
Mesh build_refined_mesh(const Weight& w, double coarse_dx, double fine_dx, double pad);

/// Same, with pad = 10 * fine_dx.
Mesh build_refined_mesh(const Weight& w, double coarse_dx, double fine_dx);

/// h_i = x_i - x_{i-1}, i = 1..N+1.
std::vector<double> mesh_spacings(const Mesh& m);

}  // namespace nehari
