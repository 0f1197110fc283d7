#pragma once

// Half-line shifted harmonic oscillator  O(k) = -d^2/dmu^2 + (mu + k)^2  on mu > 0
// with a Dirichlet condition at mu = 0. Second-order finite differences on a
// uniform grid; eigenvalues by Sturm bisection, eigenvectors by inverse iteration.

#include <vector>

namespace edgestates {

struct HalfLineGrid {
  double mu_max = 20.0;
  std::size_t n_points = 4001;

  double spacing() const { return mu_max / static_cast<double>(n_points - 1); }
  // Grid with the same extent and half the spacing (nested nodes).
  HalfLineGrid refined() const { return {mu_max, 2 * n_points - 1}; }
  // mu_max = max(20, |k| + 12) with spacing close to h.
  static HalfLineGrid for_wavenumber(double k, double h = 5e-3);
  // Throws InvalidArgument when the grid cannot serve wavenumber k.
  void validate(double k) const;
};

// One eigenpair of O(k). H holds samples at mu_j = j h for j = 0..n-1, with
// H[0] = H[n-1] = 0, unit trapezoid norm, and H'(0) > 0.
struct OscillatorEigenpair {
  int l = 1;
  double k = 0.0;
  double nu = 0.0;
  double h = 0.0;
  std::vector<double> H;
  double residual = 0.0;  // discrete ||(O_h - nu) H||

  double mu_max() const { return h * static_cast<double>(H.size() - 1); }
  // Cubic interpolation of H; zero outside the grid.
  double value_at(double mu) const;
};

// The l_max lowest eigenpairs (l = 1..l_max), increasing in nu.
std::vector<OscillatorEigenpair> solve_oscillator(double k, int l_max, const HalfLineGrid& grid);

// nu'_l(k) = 2 int (mu + k) |H|^2 dmu.
double eigenvalue_derivative(const OscillatorEigenpair& pair);

// R^{2m} int_{|mu+k|>R} |H|^2 dmu.
double tail_mass(const OscillatorEigenpair& pair, double R, int m);

// int mu ((mu + k)^2 + k^2) |H|^2 dmu, the numerator of B_l(k).
double boundary_moment(const OscillatorEigenpair& pair);

// Richardson-extrapolated (h, h/2) branch data at (l, k).
struct BranchPoint {
  int l = 1;
  double k = 0.0;
  double nu = 0.0;
  double nu_prime = 0.0;
  double moment = 0.0;  // boundary_moment
  double nu_change = 0.0;  // |nu_extrapolated - nu_{h/2}|, a discretization error proxy
};

BranchPoint branch_point(int l, double k, double h = 5e-3);

double extrapolated_eigenvalue(int l, double k, double h = 5e-3);

}  // namespace edgestates
