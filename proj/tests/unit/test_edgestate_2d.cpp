// Edge states from the discrete operator.
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "edgestates/dispersion.hpp"
#include "edgestates/edgestate.hpp"
#include "edgestates/field.hpp"
#include "edgestates/geometry.hpp"
#include "edgestates/spectra2d.hpp"

using namespace edgestates;

namespace {
constexpr double kPi = std::numbers::pi;

struct State {
  std::shared_ptr<const GaugeData> gauge;
  MagneticOperator2D op;
  double eigenvalue = 0.0;
  std::vector<cplx> psi;
};

// Eigenvector nearest the prediction closest to nu_1 = target.
State edge_state(const CurveDescriptor& d, double eps, double target) {
  static const DispersionBranch b1 = build_branch(1, -10.0, 4.0, 0.05);
  State st;
  const BoundaryCurve curve = BoundaryCurve::build(d);
  st.gauge = std::make_shared<const GaugeData>(solve_poisson(curve));
  const auto preds = predict_eigenvalues({b1}, GapWindow{}, eps);
  const EigenvaluePrediction* best = &preds.front();
  for (const auto& p : preds)
    if (std::abs(p.nu - target) < std::abs(best->nu - target)) best = &p;
  st.op = MagneticOperator2D::assemble(curve, *st.gauge, eps, eps / 6);
  const SpectralResult r = eigensolve_near(st.op, best->lambda_pred, 1);
  st.eigenvalue = r.eigenvalues[0];
  st.psi = r.eigenvectors[0];
  return st;
}

double profile_ratio(const State& st, double eps, double M) {
  double lo = 1e300, hi = 0.0;
  for (const auto& [xi, m] : boundary_mass_profile(st.psi, st.op.grid(), *st.gauge, eps, M)) {
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  return hi / lo;
}
}  // namespace

TEST_CASE("disk edge state has a flat boundary profile") {
  const double eps = 0.05;
  const State st = edge_state(CurveDescriptor::disk(1.0), eps, 2.0);
  CHECK(profile_ratio(st, eps, 4.0) < 1.05);
}

TEST_CASE("edge state is more boundary-localized than a bulk state") {
  const double eps = 0.05;
  const State edge = edge_state(CurveDescriptor::disk(1.0), eps, 2.0);
  const SpectralResult bulk = eigensolve_near(edge.op, 1.0 / (eps * eps), 1);
  CHECK(localization_moment(edge.op.grid(), edge.psi, 1, eps) <
        localization_moment(edge.op.grid(), bulk.eigenvectors[0], 1, eps));
}

TEST_CASE("ellipse edge state profile") {
  const double eps = 0.02;
  const State st = edge_state(CurveDescriptor::ellipse(0.2, 0.1), eps, 2.0);
  CHECK(profile_ratio(st, eps, 1 / std::sqrt(eps)) <= 1.5);
}

TEST_CASE("amplitude winding along the disk boundary") {
  const double eps = 0.05;
  const State st = edge_state(CurveDescriptor::disk(1.0), eps, 2.0);
  static const DispersionBranch b1 = build_branch(1, -4.0, 2.0, 0.05);
  const EdgeStateModel model =
      EdgeStateModel::at_energy(st.gauge, eps, st.eigenvalue * eps * eps, {b1}, {{1, 1.0, 0.0}});
  const ComparisonReport rep = compare(st.psi, st.op.grid(), model, std::min(1 / std::sqrt(eps), 0.25 / eps));
  REQUIRE(rep.local.size() >= 8);
  // Drift of the local coefficient between two window centres a quarter loop apart.
  const std::size_t i1 = 0, i2 = rep.local.size() / 4;
  const double xi1 = rep.local[i1].xi, xi2 = rep.local[i2].xi;
  const double drift = std::arg(rep.local[i2].coefficients[0] / rep.local[i1].coefficients[0]);
  const double expected = std::remainder(model.B(0) * 2 * kPi * (xi2 - xi1), 2 * kPi);
  CHECK(std::abs(std::remainder(drift - expected, 2 * kPi)) <= 0.1 * std::abs(expected));
}
