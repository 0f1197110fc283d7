#pragma once

#include <complex>
#include <iosfwd>
#include <memory>
#include <vector>

#include "edgestates/domain_grid.hpp"
#include "edgestates/geometry.hpp"
#include "edgestates/spline.hpp"

namespace edgestates {

struct PoissonOptions {
  // Grid spacing; 0 picks half_width / 24 of the tubular map.
  double h = 0.0;
  std::size_t alpha_samples = 2048;
  // Relative residual accepted from the sparse solve.
  double residual_tolerance = 1e-10;
};

// Torsion potential phi (-Laplace phi = 1, phi = 0 on the boundary), the gauge
// field a = (d2 phi, -d1 phi) and the boundary slope alpha = inward normal derivative.
class GaugeData {
 public:
  static GaugeData solve(const BoundaryCurve& curve, const PoissonOptions& options = {});

  const DomainGrid& grid() const { return grid_; }
  const TubularMap& tube() const { return tube_; }
  const BoundaryCurve& curve() const { return tube_.curve(); }
  // phi at grid nodes (zero outside the mask, extrapolated in the ghost band).
  const std::vector<double>& phi_nodes() const { return phi_; }
  double linear_residual() const { return residual_; }

  // Bicubic interpolation; throws OutsideDomain beyond the ghost band.
  double phi(Vec2 p) const;
  Vec2 grad_phi(Vec2 p) const;
  Vec2 potential(Vec2 p) const {
    const Vec2 g = grad_phi(p);
    return {g.y, -g.x};
  }

  double alpha(double xi) const { return alpha_.value(wrap(xi)); }
  double alpha_prime(double xi) const { return alpha_.derivative(wrap(xi)); }
  double alpha_second(double xi) const { return alpha_.second_derivative(wrap(xi)); }
  // int_0^xi alpha on the periodic extension.
  double alpha_integral(double xi) const { return alpha_.integral(xi); }
  // Boundary flux: the integral of alpha over one loop.
  double flux() const { return flux_; }
  const CubicSpline& alpha_spline() const { return alpha_; }

  // |Omega| from the curve (Green's theorem) and from the mask.
  double area() const { return curve().area(); }
  double mask_area() const { return grid_.mask_area(); }

  // Fractional part of flux / (2 pi eps^2).
  double omega(double epsilon) const;
  // rho(xi, s) = -int_0^xi alpha + alpha'(xi) s^2 / 2 + eps^2 2 pi omega xi. Throws OutsideTube.
  double rho(double epsilon, double xi, double s) const;
  // Cartesian gradient of rho at (xi, s).
  Vec2 grad_rho(double epsilon, double xi, double s) const;

  void write_alpha_csv(std::ostream& out) const;
  void write_phi_csv(std::ostream& out) const;

 private:
  double wrap(double xi) const;
  double cubic_at(Vec2 p, bool gradient, Vec2* grad) const;
  void fill_ghosts(bool third_order);
  void extract_alpha(std::size_t samples);

  DomainGrid grid_;
  TubularMap tube_;
  std::vector<double> phi_;
  std::vector<char> valid_;
  CubicSpline alpha_;
  double flux_ = 0.0;
  double residual_ = 0.0;
};

GaugeData solve_poisson(const BoundaryCurve& curve, double h = 0.0);

struct ExpansionReport {
  double epsilon = 0.0;
  std::vector<double> s;
  std::vector<double> tangential;  // max over xi of the tangential residual
  std::vector<double> normal;      // max over xi of the normal residual
  std::vector<double> residual;    // max of both
  double slope = 0.0;              // log-log slope of residual against s
  double constant = 0.0;           // residual(s_max) / (s_max^3 + eps^2)
};

// Evaluates a + grad rho in the (T, N) frame on xi_samples points per s and subtracts
// the predicted tangential -(s + kappa s^2 / 2) and normal (3 alpha' kappa + alpha kappa') s^2 / 2
// terms; the exact eps^2 2 pi omega / h_xi tangential term is removed from the s-dependent part.
ExpansionReport expansion_residual(const GaugeData& data, double epsilon, const std::vector<double>& s_values,
                                   std::size_t xi_samples = 512);

// ||d^n psi|| / eps^n with psi indexed by grid unknowns (normalized internally).
double localization_moment(const DomainGrid& grid, const std::vector<std::complex<double>>& psi, int n,
                           double epsilon);

// x, y, value rows for the unknowns of a grid.
void write_grid_csv(std::ostream& out, const DomainGrid& grid, const std::vector<double>& values);

}  // namespace edgestates
