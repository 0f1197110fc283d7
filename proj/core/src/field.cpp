#include "edgestates/field.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "edgestates/error.hpp"
#include "edgestates/io.hpp"
#include "edgestates/parallel.hpp"

namespace edgestates {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// Lagrange weights (and derivatives) at t for nodes -1, 0, 1, 2.
void cubic_weights(double t, std::array<double, 4>& w, std::array<double, 4>& dw) {
  const double a = t + 1, b = t, c = t - 1, d = t - 2;
  w = {-b * c * d / 6, a * c * d / 2, -a * b * d / 2, a * b * c / 6};
  dw = {-(c * d + b * d + b * c) / 6, (c * d + a * d + a * c) / 2, -(b * d + a * d + a * b) / 2,
        (b * c + a * c + a * b) / 6};
}

}  // namespace

double GaugeData::wrap(double xi) const {
  const double L = curve().perimeter();
  double r = xi - std::floor(xi / L) * L;
  if (r >= L) r -= L;
  return r;
}

double GaugeData::cubic_at(Vec2 p, bool gradient, Vec2* grad) const {
  const double h = grid_.spacing();
  const double fx = (p.x - grid_.x0()) / h, fy = (p.y - grid_.y0()) / h;
  const int i = static_cast<int>(std::floor(fx)), j = static_cast<int>(std::floor(fy));
  if (i < 1 || j < 1 || i + 2 >= grid_.nx() || j + 2 >= grid_.ny())
    fail(ErrorCode::OutsideDomain, "interpolation point leaves the potential grid");
  std::array<double, 4> wx, dwx, wy, dwy;
  cubic_weights(fx - i, wx, dwx);
  cubic_weights(fy - j, wy, dwy);
  double v = 0.0, gx = 0.0, gy = 0.0;
  for (int b = 0; b < 4; ++b) {
    for (int a = 0; a < 4; ++a) {
      const std::size_t n = grid_.node(i - 1 + a, j - 1 + b);
      if (!valid_[n]) fail(ErrorCode::OutsideDomain, "interpolation stencil leaves the ghost band");
      const double f = phi_[n];
      v += wx[a] * wy[b] * f;
      if (gradient) {
        gx += dwx[a] * wy[b] * f;
        gy += wx[a] * dwy[b] * f;
      }
    }
  }
  if (gradient && grad) *grad = {gx / h, gy / h};
  return v;
}

double GaugeData::phi(Vec2 p) const { return cubic_at(p, false, nullptr); }

Vec2 GaugeData::grad_phi(Vec2 p) const {
  Vec2 g;
  cubic_at(p, true, &g);
  return g;
}

double GaugeData::omega(double epsilon) const {
  require(epsilon > 0, "epsilon must be positive");
  const double x = flux_ / (kTwoPi * epsilon * epsilon);
  const double w = x - std::floor(x);
  return w >= 1.0 ? 0.0 : w;
}

double GaugeData::rho(double epsilon, double xi, double s) const {
  const double tol = 1e-12 * curve().perimeter();
  if (s < -tol || s > tube_.half_width() + tol) fail(ErrorCode::OutsideTube, "rho needs 0 <= s <= half-width");
  return -alpha_integral(xi) + 0.5 * alpha_prime(xi) * s * s + epsilon * epsilon * kTwoPi * omega(epsilon) * xi;
}

Vec2 GaugeData::grad_rho(double epsilon, double xi, double s) const {
  const double tol = 1e-12 * curve().perimeter();
  if (s < -tol || s > tube_.half_width() + tol) fail(ErrorCode::OutsideTube, "rho needs 0 <= s <= half-width");
  const double d_xi = -alpha(xi) + 0.5 * alpha_second(xi) * s * s + epsilon * epsilon * kTwoPi * omega(epsilon);
  const double d_s = alpha_prime(xi) * s;
  const double lame = tube_.lame(xi, s);
  return curve().tangent(xi) * (d_xi / lame) - curve().normal(xi) * d_s;
}

void GaugeData::fill_ghosts(bool third_order) {
  const BoundaryCurve& c = curve();
  const double h = grid_.spacing();
  const int nx = grid_.nx(), ny = grid_.ny();
  std::vector<std::size_t> ghosts;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t n = grid_.node(i, j);
      if (grid_.inside(n)) continue;
      bool near = false;
      for (int b = std::max(0, j - 3); b <= std::min(ny - 1, j + 3) && !near; ++b)
        for (int a = std::max(0, i - 3); a <= std::min(nx - 1, i + 3) && !near; ++a)
          near = grid_.inside(grid_.node(a, b));
      if (near) ghosts.push_back(n);
    }
  }
  const bool have_alpha = !alpha_.empty();
  std::vector<double> values(ghosts.size(), 0.0);
  std::vector<char> ok(ghosts.size(), 0);
  parallel_for(ghosts.size(), [&](std::size_t g) {
    const std::size_t n = ghosts[g];
    const Vec2 p = grid_.position(n);
    const auto [xi, s] = c.project(p);
    if (std::abs(s) > tube_.half_width()) return;
    const double kappa = c.curvature(xi);
    double a = 0.0;
    if (have_alpha) {
      a = alpha(xi);
    } else {
      // First estimate from the nearest node at depth h..4h along the boundary.
      const int i = static_cast<int>(n % nx), j = static_cast<int>(n / nx);
      double best = std::numeric_limits<double>::infinity();
      for (int b = std::max(0, j - 5); b <= std::min(ny - 1, j + 5); ++b) {
        for (int aa = std::max(0, i - 5); aa <= std::min(nx - 1, i + 5); ++aa) {
          const std::size_t m = grid_.node(aa, b);
          if (!grid_.inside(m)) continue;
          const auto [xm, sm] = c.project(grid_.position(m));
          if (sm < h || sm > 4 * h) continue;
          double dx = std::abs(xm - xi);
          dx = std::min(dx, c.perimeter() - dx);
          if (dx < best) {
            best = dx;
            const double km = c.curvature(xm);
            a = (phi_[m] + 0.5 * sm * sm) / (sm * (1.0 + 0.5 * km * sm));
          }
        }
      }
      if (!std::isfinite(best)) return;
    }
    const double beta = 0.5 * (kappa * a - 1.0);
    double v = a * s + beta * s * s;
    if (third_order && have_alpha) {
      const double gamma = (2.0 * kappa * kappa * a - kappa - alpha_second(xi)) / 6.0;
      v += gamma * s * s * s;
    }
    values[g] = v;
    ok[g] = 1;
  });
  for (std::size_t g = 0; g < ghosts.size(); ++g) {
    phi_[ghosts[g]] = ok[g] ? values[g] : 0.0;
    valid_[ghosts[g]] = ok[g];
  }
}

void GaugeData::extract_alpha(std::size_t samples) {
  const BoundaryCurve& c = curve();
  const double h = grid_.spacing();
  const std::array<double, 3> depth = {3 * h, 4 * h, 5 * h};
  // Derivative at 0 of the cubic through (0, 0) and (depth_j, phi_j).
  std::array<double, 3> weight;
  for (std::size_t j = 0; j < 3; ++j) {
    double num = 1.0, den = depth[j];
    for (std::size_t m = 0; m < 3; ++m) {
      if (m == j) continue;
      num *= -depth[m];
      den *= depth[j] - depth[m];
    }
    weight[j] = num / den;
  }
  std::vector<double> xi(samples + 1), values(samples + 1);
  const double L = c.perimeter();
  parallel_for(samples, [&](std::size_t i) {
    const double x = L * static_cast<double>(i) / static_cast<double>(samples);
    xi[i] = x;
    double a = 0.0;
    for (std::size_t j = 0; j < 3; ++j) a += weight[j] * phi(tube_.to_cartesian(x, depth[j]));
    values[i] = a;
  });
  xi[samples] = L;
  values[samples] = values[0];
  alpha_ = CubicSpline(std::move(xi), std::move(values), SplineBoundary::Periodic);
  flux_ = alpha_.integral(L);
}

GaugeData GaugeData::solve(const BoundaryCurve& curve, const PoissonOptions& options) {
  GaugeData g;
  g.tube_ = TubularMap::build(curve);
  const double delta = g.tube_.half_width();
  const double h = options.h > 0 ? options.h : delta / 24.0;
  require(h <= delta / 20.0, "Poisson grid must place at least 20 nodes across the tube");
  require(options.alpha_samples >= 64, "need at least 64 alpha samples");
  g.grid_ = DomainGrid::build(curve, h, 6);
  const DomainGrid& grid = g.grid_;
  const std::size_t n = grid.unknown_count();

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(5 * n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
  const double h2 = h * h;
  for (std::size_t u = 0; u < n; ++u) {
    const std::size_t node = grid.inside_nodes()[u];
    double diag = 0.0;
    for (int axis = 0; axis < 2; ++axis) {
      const auto plus = static_cast<DomainGrid::Direction>(2 * axis), minus = static_cast<DomainGrid::Direction>(2 * axis + 1);
      const double tp = grid.cut(u, plus), tm = grid.cut(u, minus);
      diag += 2.0 / (tp * tm * h2);
      const std::size_t np = grid.neighbour(node, plus), nm = grid.neighbour(node, minus);
      if (tp == 1.0 && np != kNone && grid.inside(np))
        triplets.emplace_back(static_cast<int>(u), static_cast<int>(grid.unknown(np)), -2.0 / (tp * (tp + tm) * h2));
      if (tm == 1.0 && nm != kNone && grid.inside(nm))
        triplets.emplace_back(static_cast<int>(u), static_cast<int>(grid.unknown(nm)), -2.0 / (tm * (tp + tm) * h2));
    }
    triplets.emplace_back(static_cast<int>(u), static_cast<int>(u), diag);
  }
  Eigen::SparseMatrix<double> A(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  A.setFromTriplets(triplets.begin(), triplets.end());
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) fail(ErrorCode::SolverDiverged, "Poisson factorization failed");
  Eigen::VectorXd x = lu.solve(rhs);
  g.residual_ = (A * x - rhs).norm() / rhs.norm();
  if (!(g.residual_ <= options.residual_tolerance))
    fail(ErrorCode::SolverDiverged, "Poisson residual " + format_number(g.residual_) + " above tolerance");

  g.phi_.assign(grid.node_count(), 0.0);
  g.valid_.assign(grid.node_count(), 0);
  for (std::size_t u = 0; u < n; ++u) {
    g.phi_[grid.inside_nodes()[u]] = x[static_cast<Eigen::Index>(u)];
    g.valid_[grid.inside_nodes()[u]] = 1;
  }
  g.fill_ghosts(false);
  g.extract_alpha(options.alpha_samples);
  for (int pass = 0; pass < 3; ++pass) {
    g.fill_ghosts(true);
    g.extract_alpha(options.alpha_samples);
  }
  return g;
}

void GaugeData::write_alpha_csv(std::ostream& out) const {
  CsvWriter csv(out, {"xi", "alpha", "alpha_prime"});
  const auto knots = alpha_.knots();
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) csv.row({knots[i], alpha(knots[i]), alpha_prime(knots[i])});
}

void GaugeData::write_phi_csv(std::ostream& out) const {
  std::vector<double> values(grid_.unknown_count());
  for (std::size_t u = 0; u < values.size(); ++u) values[u] = phi_[grid_.inside_nodes()[u]];
  write_grid_csv(out, grid_, values);
}

GaugeData solve_poisson(const BoundaryCurve& curve, double h) {
  PoissonOptions options;
  options.h = h;
  return GaugeData::solve(curve, options);
}

ExpansionReport expansion_residual(const GaugeData& data, double epsilon, const std::vector<double>& s_values,
                                   std::size_t xi_samples) {
  require(epsilon > 0, "epsilon must be positive");
  require(s_values.size() >= 2, "need at least two depths");
  const auto [smin, smax] = std::minmax_element(s_values.begin(), s_values.end());
  require(*smin > 0 && *smax >= 4.0 * *smin, "depths must be positive and span a factor 4");
  const BoundaryCurve& c = data.curve();
  const TubularMap& tube = data.tube();
  for (double s : s_values)
    if (s > tube.half_width()) fail(ErrorCode::OutsideTube, "expansion depth beyond the tube half-width");

  ExpansionReport rep;
  rep.epsilon = epsilon;
  rep.s = s_values;
  const std::size_t m = s_values.size();
  rep.tangential.assign(m, 0.0);
  rep.normal.assign(m, 0.0);
  rep.residual.assign(m, 0.0);
  const double shift = epsilon * epsilon * kTwoPi * data.omega(epsilon);
  parallel_for(m, [&](std::size_t k) {
    const double s = s_values[k];
    double rt = 0.0, rn = 0.0;
    for (std::size_t i = 0; i < xi_samples; ++i) {
      const double xi = c.perimeter() * static_cast<double>(i) / static_cast<double>(xi_samples);
      const Vec2 x = tube.to_cartesian(xi, s);
      const Vec2 v = data.potential(x) + data.grad_rho(epsilon, xi, s);
      const Vec2 T = c.tangent(xi), N = c.normal(xi);
      const double kappa = c.curvature(xi), dkappa = c.curvature_derivative(xi);
      const double a = data.alpha(xi), da = data.alpha_prime(xi);
      const double pred_t = -(s + 0.5 * kappa * s * s) + shift / tube.lame(xi, s);
      const double pred_n = 0.5 * (3.0 * da * kappa + a * dkappa) * s * s;
      rt = std::max(rt, std::abs(v.dot(T) - pred_t));
      rn = std::max(rn, std::abs(v.dot(N) - pred_n));
    }
    rep.tangential[k] = rt;
    rep.normal[k] = rn;
    rep.residual[k] = std::max(rt, rn);
  });
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < m; ++k) {
    const double lx = std::log(s_values[k]), ly = std::log(rep.residual[k]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  rep.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  const std::size_t kmax = static_cast<std::size_t>(smax - s_values.begin());
  rep.constant = rep.residual[kmax] / (std::pow(*smax, 3) + epsilon * epsilon);
  return rep;
}

double localization_moment(const DomainGrid& grid, const std::vector<std::complex<double>>& psi, int n,
                           double epsilon) {
  require(psi.size() == grid.unknown_count(), "field size does not match the grid");
  require(n >= 0 && epsilon > 0, "moment order must be non-negative and epsilon positive");
  if (n == 0) return 1.0;
  const auto& d = grid.boundary_distances();
  double num = 0.0, den = 0.0;
  for (std::size_t u = 0; u < psi.size(); ++u) {
    const double w = std::norm(psi[u]);
    num += std::pow(d[u], 2 * n) * w;
    den += w;
  }
  require(den > 0, "zero field");
  return std::sqrt(num / den) / std::pow(epsilon, n);
}

void write_grid_csv(std::ostream& out, const DomainGrid& grid, const std::vector<double>& values) {
  require(values.size() == grid.unknown_count(), "field size does not match the grid");
  CsvWriter csv(out, {"x", "y", "value"});
  for (std::size_t u = 0; u < values.size(); ++u) {
    const Vec2 p = grid.position(grid.inside_nodes()[u]);
    csv.row({p.x, p.y, values[u]});
  }
}

}  // namespace edgestates
