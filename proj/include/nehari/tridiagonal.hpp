#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nehari {

/// Square tridiagonal matrix; row i holds sub[i-1], diag[i], sup[i].
struct Tridiagonal {
    std::vector<double> sub;
    std::vector<double> diag;
    std::vector<double> sup;

    Tridiagonal() = default;
    explicit Tridiagonal(std::size_t n) : sub(n ? n - 1 : 0), diag(n), sup(n ? n - 1 : 0) {}

    std::size_t size() const { return diag.size(); }

    /// y = A x
    std::vector<double> apply(std::span<const double> x) const;
    /// y = A^T x
    std::vector<double> apply_transpose(std::span<const double> x) const;
    /// Largest absolute row sum.
    double norm_inf() const;
};

/// LU factorization with partial pivoting (row interchanges between
/// neighbouring rows only, so U gains a second superdiagonal).
class TridiagonalLU {
public:
    explicit TridiagonalLU(const Tridiagonal& a);

    /// Smallest |u_kk| relative to the matrix infinity norm.
    double min_relative_pivot() const { return min_pivot_; }
    bool singular(double rel_tol) const { return min_pivot_ < rel_tol; }

    std::vector<double> solve(std::span<const double> rhs) const;
    std::vector<double> solve_transpose(std::span<const double> rhs) const;

    /// +1/-1 sign of det(A), 0 when a pivot is exactly zero.
    int det_sign() const;

private:
    std::size_t n_;
    std::vector<double> l_;    // multipliers
    std::vector<double> u0_;   // U diagonal
    std::vector<double> u1_;   // first superdiagonal
    std::vector<double> u2_;   // second superdiagonal (fill-in)
    std::vector<char> swapped_;
    double min_pivot_ = 0.0;
};

/// Sign and log-magnitude of a determinant.
struct DetSign {
    int sign = 0;
    double log_abs = 0.0;
};

/// Determinant via the three-term recurrence
/// f_k = d_k f_{k-1} - s_{k-1} t_{k-1} f_{k-2}, rescaled each step.
/// Sign 0 is reported when the smallest singular value (estimated by inverse
/// iteration) falls below `zero_tol` times the infinity norm.
DetSign det_sign(const Tridiagonal& a, double zero_tol = 1e-10);

/// Number of eigenvalues strictly below `shift` for a tridiagonal matrix with
/// sub[i] * sup[i] > 0 (similar to a symmetric one): Sturm count of
/// A - shift I.
std::size_t eigenvalues_below(const Tridiagonal& a, double shift);

}  // namespace nehari
