#pragma once

#include <complex>
#include <iosfwd>
#include <memory>
#include <vector>

#include "edgestates/dispersion.hpp"
#include "edgestates/domain_grid.hpp"
#include "edgestates/field.hpp"
#include "edgestates/oscillator.hpp"

namespace edgestates {

using cplx = std::complex<double>;

// F(xi) = exp(i B int_0^xi kappa).
cplx amplitude(const BoundaryCurve& curve, double B, double xi);
// Same with B = B_l(k).
cplx amplitude(const BoundaryCurve& curve, int l, double k, double xi);

struct EdgeComponent {
  int l = 1;
  cplx C{1.0, 0.0};
  double k = 0.0;  // k_{l,eps}
};

class EdgeStateModel {
 public:
  // Explicit wavenumbers. Throws InvalidArgument unless sum |C|^2 = 1 within 1e-10.
  static EdgeStateModel create(std::shared_ptr<const GaugeData> gauge, double epsilon,
                               std::vector<EdgeComponent> components, double rho0 = 0.0);
  // Wavenumbers from nu_l(k) = scaled_lambda on the given branches (components keep l and C).
  static EdgeStateModel at_energy(std::shared_ptr<const GaugeData> gauge, double epsilon, double scaled_lambda,
                                  const std::vector<DispersionBranch>& branches, std::vector<EdgeComponent> components,
                                  double rho0 = 0.0);

  double epsilon() const { return epsilon_; }
  double rho0() const { return rho0_; }
  const std::vector<EdgeComponent>& components() const { return components_; }
  const GaugeData& gauge() const { return *gauge_; }
  std::shared_ptr<const GaugeData> gauge_ptr() const { return gauge_; }
  double B(std::size_t component) const { return B_[component]; }
  const OscillatorEigenpair& profile(std::size_t component) const { return profiles_[component]; }

  // Same model with new coefficients and phase (sum |C|^2 <= 1 allowed, used for fitted states).
  EdgeStateModel with_coefficients(const std::vector<cplx>& C, double rho0) const;

 private:
  std::shared_ptr<const GaugeData> gauge_;
  double epsilon_ = 0.0;
  double rho0_ = 0.0;
  std::vector<EdgeComponent> components_;
  std::vector<double> B_;
  std::vector<OscillatorEigenpair> profiles_;
};

// Evaluator of the flat edge-state ansatz in curvilinear coordinates.
class FlatState {
 public:
  explicit FlatState(EdgeStateModel model) : model_(std::move(model)) {}

  // eps^-1/2 sum_l C_l exp(i(theta_l - k_l xi / eps + rho0)) H_l(k_l, s / eps),
  // theta_l = eps^-2 rho(xi, s) + B_l int_0^xi kappa. Throws OutsideTube.
  cplx value(double xi, double s) const;
  // The same without the gauge factor exp(i eps^-2 rho).
  cplx reduced(double xi, double s) const;
  // Contribution of one component to reduced(), without C_l and rho0.
  cplx basis(std::size_t component, double xi, double s) const;

  const EdgeStateModel& model() const { return model_; }

 private:
  EdgeStateModel model_;
};

// value() on the unknowns of a grid; zero deeper than the tubular half-width.
std::vector<cplx> sample_on_grid(const FlatState& state, const DomainGrid& grid);

struct CompareOptions {
  bool fit = true;          // fit C_l and rho0; otherwise use the model's
  std::size_t windows = 64;  // window centres xi*
  double mu_max = 8.0;      // depth of the sampled strip in units of eps (capped by the tube)
  double resolution = 8.0;  // samples per eps along xi and s
};

struct LocalFit {
  double xi = 0.0;
  std::vector<cplx> coefficients;  // local projections c_l(xi*)
};

struct ComparisonReport {
  double M = 0.0;
  double epsilon = 0.0;
  double windowed_distance = 0.0;
  double overlap = 0.0;
  std::vector<cplx> C;  // mean of the local least-squares fits, scaled so that sum |C|^2 <= 1
  double rho0 = 0.0;
  double m_eps = 0.0;
  double strip_mass = 0.0;  // mass of psi_num inside the sampled strip
  std::vector<std::pair<double, double>> profile;
  std::vector<LocalFit> local;
};

// psi_num is indexed by grid unknowns, in the gauge of the operator (a-gauge).
ComparisonReport compare(const std::vector<cplx>& psi_num, const DomainGrid& grid, const EdgeStateModel& model,
                         double M, const CompareOptions& options = {});

// (xi*, (1/2M eps) int_{|xi - xi*| < M eps} int |psi|^2) on a uniform xi* grid.
std::vector<std::pair<double, double>> boundary_mass_profile(const std::vector<cplx>& psi_num, const DomainGrid& grid,
                                                             const GaugeData& gauge, double epsilon, double M,
                                                             std::size_t windows = 64, double mu_max = 8.0);

// Fraction of the discrete mass of psi within distance d of the boundary.
double mass_within(const std::vector<cplx>& psi, const DomainGrid& grid, double distance);

void write_report_json(std::ostream& out, const ComparisonReport& report);
void write_profile_csv(std::ostream& out, const std::vector<std::pair<double, double>>& profile);

}  // namespace edgestates
