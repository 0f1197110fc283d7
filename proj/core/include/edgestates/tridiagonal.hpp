#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace edgestates {

// Real symmetric tridiagonal matrix: diagonal d[0..n), off-diagonal e[0..n-1).
struct SymmetricTridiagonal {
  std::vector<double> diag;
  std::vector<double> off;

  std::size_t size() const { return diag.size(); }

  // Number of eigenvalues strictly below x (Sturm sequence).
  std::size_t count_below(double x) const;

  // Gershgorin interval containing the spectrum.
  std::pair<double, double> spectrum_bounds() const;

  // index-th smallest eigenvalue (0-based) by bisection on count_below.
  double eigenvalue(std::size_t index) const;

  // Eigenvector for an (accurately known) eigenvalue by inverse iteration.
  // Euclidean unit norm; sign not fixed.
  std::vector<double> eigenvector(double eigenvalue, int iterations = 3) const;

  void multiply(std::span<const double> x, std::span<double> y) const;
};

// Solves (T - shift) x = b with partial pivoting; T given by (sub, diag, super).
std::vector<double> solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                                      std::span<const double> super, std::span<const double> rhs);

}  // namespace edgestates
