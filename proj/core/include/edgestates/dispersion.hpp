#pragma once

// Dispersion branches k -> nu_l(k), the boundary coefficient B_l(k), the
// wavenumber equation nu_l(k) = lambda and two-term eigenvalue predictions.

#include <iosfwd>
#include <optional>
#include <vector>

#include "edgestates/spline.hpp"

namespace edgestates {

// Below this group velocity B_l = -moment / nu' is numerically meaningless
// (the branch is flat to machine precision) and is stored as NaN.
inline constexpr double kGroupVelocityFloor = 1e-9;

struct BranchOptions {
  double oscillator_h = 5e-3;
  bool verify_midpoints = true;
  double midpoint_tolerance = 1e-6;
};

struct DispersionBranch {
  int l = 1;
  std::vector<double> k;
  std::vector<double> nu, nu_prime, B;
  CubicSpline nu_spline, nu_prime_spline, B_spline;  // B_spline covers [k_B_min, k_max]
  double k_B_min = 0.0;
  double max_midpoint_error = 0.0;
  double oscillator_h = 5e-3;

  double k_min() const { return k.front(); }
  double k_max() const { return k.back(); }
  double nu_at(double kk) const { return nu_spline(kk); }
  double nu_prime_at(double kk) const { return nu_prime_spline(kk); }
  // NaN below k_B_min.
  double B_at(double kk) const;
};

DispersionBranch build_branch(int l, double k_min, double k_max, double step, const BranchOptions& options = {});

// Unique root of nu_l(k) = lambda; |nu_l(k) - lambda| < 1e-8 against direct solves.
double solve_wavenumber(const DispersionBranch& branch, double lambda);

// B_l(k) = -nu'_l(k)^{-1} int mu ((mu + k)^2 + k^2) |H_l|^2 dmu.
double coefficient_B(int l, double k, double oscillator_h = 5e-3);

// Spectral gap (2N - 1, 2N + 1) with target lambda at distance >= delta from
// the Landau levels.
struct GapWindow {
  int N = 1;
  double lambda = 2.0;
  double delta = 0.2;

  void validate() const;
  double lower() const { return 2.0 * N - 1.0; }
  double upper() const { return 2.0 * N + 1.0; }
};

struct EigenvaluePrediction {
  int l = 1;
  long n = 0;  // q = 2 pi epsilon n
  double q = 0.0;
  double epsilon = 0.0;
  double nu = 0.0, nu_prime = 0.0, B = 0.0;
  double lambda_pred = 0.0;
};

// lambda_pred = eps^-2 nu_l(q) + eps^-1 2 pi nu'_l(q) B_l(q) at q = 2 pi eps n,
// evaluated by direct solves.
EigenvaluePrediction predict_at(int l, long n, double epsilon, double oscillator_h = 5e-3);

// All q = 2 pi eps n inside every branch's sampled range with nu_l(q) in the
// closed gap [2N - 1, 2N + 1] (or in `energy_range` when given), for branches
// l <= N. Sorted ascending by lambda_pred. Throws EmptyWindow when none.
std::vector<EigenvaluePrediction> predict_eigenvalues(const std::vector<DispersionBranch>& branches,
                                                      const GapWindow& window, double epsilon,
                                                      std::optional<std::pair<double, double>> energy_range = {});

void write_branch_csv(std::ostream& out, const std::vector<DispersionBranch>& branches);
void write_predictions_json(std::ostream& out, const std::vector<EigenvaluePrediction>& predictions);

}  // namespace edgestates
