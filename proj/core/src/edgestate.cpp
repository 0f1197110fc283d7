#include "edgestates/edgestate.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>

#include "edgestates/error.hpp"
#include "edgestates/io.hpp"
#include "edgestates/parallel.hpp"
#include "json.hpp"

namespace edgestates {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_phase(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0) r += kTwoPi;
  return r;
}

// Gauge phase without the tube check, for grid nodes next to the sampled strip.
double gauge_phase(const GaugeData& g, double epsilon, double xi, double s) {
  return -g.alpha_integral(xi) + 0.5 * g.alpha_prime(xi) * s * s +
         epsilon * epsilon * kTwoPi * g.omega(epsilon) * xi;
}

// Uniform (xi, s) sampling of a grid field in the strip 0 <= s <= s_max.
class StripSampler {
 public:
  StripSampler(const DomainGrid& grid, const GaugeData& gauge, double epsilon, double resolution, double mu_max)
      : grid_(grid), gauge_(gauge), epsilon_(epsilon) {
    const BoundaryCurve& c = gauge.curve();
    const double L = c.perimeter();
    const double h = grid.spacing();
    s_max_ = std::min(mu_max * epsilon, gauge.tube().half_width());
    if (!(s_max_ > 2 * h)) fail(ErrorCode::GridTooCoarse, "sampled strip is thinner than two grid cells");
    n_xi_ = std::max<std::size_t>(256, static_cast<std::size_t>(std::ceil(resolution * L / epsilon)));
    n_s_ = std::max<std::size_t>(16, static_cast<std::size_t>(std::ceil(resolution * s_max_ / epsilon)));
    dxi_ = L / static_cast<double>(n_xi_);
    ds_ = s_max_ / static_cast<double>(n_s_);
    xi_.resize(n_xi_);
    f_.resize(n_xi_);
    normal_.resize(n_xi_);
    turning_.resize(n_xi_);
    parallel_for(n_xi_, [&](std::size_t j) {
      const double xi = dxi_ * static_cast<double>(j);
      xi_[j] = xi;
      f_[j] = c.point(xi);
      normal_[j] = c.normal(xi);
      turning_[j] = c.curvature_integral(xi);
    });
    node_xi_.resize(grid.unknown_count());
    node_s_.resize(grid.unknown_count());
    parallel_for(grid.unknown_count(), [&](std::size_t u) {
      const auto [xi, s] = c.project(grid.position(grid.inside_nodes()[u]));
      node_xi_[u] = xi;
      node_s_[u] = s;
    });
  }

  std::size_t n_xi() const { return n_xi_; }
  double s_max() const { return s_max_; }
  double node_depth(std::size_t u) const { return node_s_[u]; }
  std::size_t n_s() const { return n_s_ + 1; }
  double xi(std::size_t j) const { return xi_[j]; }
  double s(std::size_t k) const { return ds_ * static_cast<double>(k); }
  double turning(std::size_t j) const { return turning_[j]; }
  // Trapezoid weight of sample (j, k) in the flat measure dxi ds, the measure in
  // which the ansatz has unit norm per unit boundary length.
  double weight(std::size_t, std::size_t k) const {
    const double trap = (k == 0 || k == n_s_) ? 0.5 : 1.0;
    return dxi_ * ds_ * trap;
  }
  Vec2 position(std::size_t j, std::size_t k) const { return f_[j] - normal_[j] * s(k); }

  // Bilinear interpolation of exp(-i eps^-2 rho) psi, demodulated by exp(i k_ref xi / eps) at the nodes.
  cplx gauged(const std::vector<cplx>& psi, std::size_t j, std::size_t k, double k_ref) const {
    const Vec2 p = position(j, k);
    const double h = grid_.spacing();
    const double fx = (p.x - grid_.x0()) / h, fy = (p.y - grid_.y0()) / h;
    const int i0 = static_cast<int>(std::floor(fx)), j0 = static_cast<int>(std::floor(fy));
    const double tx = fx - i0, ty = fy - j0;
    const double L = gauge_.curve().perimeter();
    cplx acc = 0.0;
    for (int b = 0; b < 2; ++b) {
      for (int a = 0; a < 2; ++a) {
        const int ii = i0 + a, jj = j0 + b;
        if (ii < 0 || jj < 0 || ii >= grid_.nx() || jj >= grid_.ny()) continue;
        const long u = grid_.unknown(grid_.node(ii, jj));
        if (u < 0) continue;
        const double w = (a ? tx : 1 - tx) * (b ? ty : 1 - ty);
        double xn = node_xi_[u];
        xn += L * std::round((xi_[j] - xn) / L);
        const double phase = -gauge_phase(gauge_, epsilon_, xn, node_s_[u]) / (epsilon_ * epsilon_) +
                             k_ref * (xn - xi_[j]) / epsilon_;
        acc += w * psi[u] * std::polar(1.0, phase);
      }
    }
    return acc;
  }

  double density(const std::vector<cplx>& psi, std::size_t j, std::size_t k) const {
    const Vec2 p = position(j, k);
    const double h = grid_.spacing();
    const double fx = (p.x - grid_.x0()) / h, fy = (p.y - grid_.y0()) / h;
    const int i0 = static_cast<int>(std::floor(fx)), j0 = static_cast<int>(std::floor(fy));
    const double tx = fx - i0, ty = fy - j0;
    double acc = 0.0;
    for (int b = 0; b < 2; ++b) {
      for (int a = 0; a < 2; ++a) {
        const int ii = i0 + a, jj = j0 + b;
        if (ii < 0 || jj < 0 || ii >= grid_.nx() || jj >= grid_.ny()) continue;
        const long u = grid_.unknown(grid_.node(ii, jj));
        if (u < 0) continue;
        acc += (a ? tx : 1 - tx) * (b ? ty : 1 - ty) * std::norm(psi[u]);
      }
    }
    return acc;
  }

  // Sample columns within |xi - centre| < half (periodic distance).
  std::vector<std::size_t> window(double centre, double half) const {
    const double L = gauge_.curve().perimeter();
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < n_xi_; ++j) {
      double d = std::abs(xi_[j] - centre);
      d = std::min(d, L - d);
      if (d < half) cols.push_back(j);
    }
    return cols;
  }
  double dxi() const { return dxi_; }

 private:
  const DomainGrid& grid_;
  const GaugeData& gauge_;
  double epsilon_;
  double s_max_ = 0.0, dxi_ = 0.0, ds_ = 0.0;
  std::size_t n_xi_ = 0, n_s_ = 0;
  std::vector<double> xi_, turning_;
  std::vector<Vec2> f_, normal_;
  std::vector<double> node_xi_, node_s_;
};

void check_window(const DomainGrid& grid, double epsilon, double M) {
  if (grid.spacing() > epsilon / 6.0 * (1.0 + 1e-9))
    fail(ErrorCode::GridTooCoarse, "field grid must resolve eps / 6");
  if (!(M >= 1.0) || M > 0.25 / epsilon) fail(ErrorCode::WindowTooWide, "window factor must satisfy 1 <= M <= 0.25 / eps");
}

std::vector<cplx> normalized(const std::vector<cplx>& psi, const DomainGrid& grid) {
  require(psi.size() == grid.unknown_count(), "field size does not match the grid");
  double total = 0.0;
  for (const cplx& v : psi) total += std::norm(v);
  total *= grid.spacing() * grid.spacing();
  require(total > 0, "zero field");
  std::vector<cplx> out(psi);
  const double scale = 1.0 / std::sqrt(total);
  for (cplx& v : out) v *= scale;
  return out;
}

}  // namespace

cplx amplitude(const BoundaryCurve& curve, double B, double xi) { return std::polar(1.0, B * curve.curvature_integral(xi)); }

cplx amplitude(const BoundaryCurve& curve, int l, double k, double xi) { return amplitude(curve, coefficient_B(l, k), xi); }

EdgeStateModel EdgeStateModel::create(std::shared_ptr<const GaugeData> gauge, double epsilon,
                                      std::vector<EdgeComponent> components, double rho0) {
  require(gauge != nullptr, "edge-state model needs gauge data");
  require(epsilon > 0 && epsilon < 0.5, "epsilon must lie in (0, 0.5)");
  require(!components.empty(), "edge-state model needs at least one component");
  double norm2 = 0.0;
  for (const auto& c : components) norm2 += std::norm(c.C);
  require(std::abs(norm2 - 1.0) <= 1e-10, "edge-state coefficients must satisfy sum |C|^2 = 1");
  EdgeStateModel m;
  m.gauge_ = std::move(gauge);
  m.epsilon_ = epsilon;
  m.rho0_ = wrap_phase(rho0);
  m.components_ = std::move(components);
  m.B_.resize(m.components_.size());
  m.profiles_.resize(m.components_.size());
  for (std::size_t i = 0; i < m.components_.size(); ++i) {
    const auto& c = m.components_[i];
    require(c.l >= 1, "branch index must be >= 1");
    const auto pairs = solve_oscillator(c.k, c.l, HalfLineGrid::for_wavenumber(c.k));
    m.profiles_[i] = pairs.back();
    m.B_[i] = coefficient_B(c.l, c.k);
  }
  return m;
}

EdgeStateModel EdgeStateModel::at_energy(std::shared_ptr<const GaugeData> gauge, double epsilon, double scaled_lambda,
                                         const std::vector<DispersionBranch>& branches,
                                         std::vector<EdgeComponent> components, double rho0) {
  for (auto& c : components) {
    const auto it = std::find_if(branches.begin(), branches.end(), [&](const DispersionBranch& b) { return b.l == c.l; });
    require(it != branches.end(), "no dispersion branch for l = " + std::to_string(c.l));
    c.k = solve_wavenumber(*it, scaled_lambda);
  }
  return create(std::move(gauge), epsilon, std::move(components), rho0);
}

EdgeStateModel EdgeStateModel::with_coefficients(const std::vector<cplx>& C, double rho0) const {
  require(C.size() == components_.size(), "coefficient count mismatch");
  double norm2 = 0.0;
  for (const cplx& c : C) norm2 += std::norm(c);
  require(norm2 <= 1.0 + 1e-10, "coefficients must satisfy sum |C|^2 <= 1");
  EdgeStateModel m = *this;
  for (std::size_t i = 0; i < C.size(); ++i) m.components_[i].C = C[i];
  m.rho0_ = wrap_phase(rho0);
  return m;
}

cplx FlatState::basis(std::size_t component, double xi, double s) const {
  const auto& c = model_.components()[component];
  const double eps = model_.epsilon();
  const double turning = model_.gauge().curve().curvature_integral(xi);
  const double H = model_.profile(component).value_at(s / eps);
  return std::polar(H / std::sqrt(eps), model_.B(component) * turning - c.k * xi / eps);
}

cplx FlatState::reduced(double xi, double s) const {
  const double tol = 1e-12 * model_.gauge().curve().perimeter();
  if (s < -tol || s > model_.gauge().tube().half_width() + tol)
    fail(ErrorCode::OutsideTube, "flat state needs 0 <= s <= half-width");
  cplx acc = 0.0;
  for (std::size_t i = 0; i < model_.components().size(); ++i) acc += model_.components()[i].C * basis(i, xi, s);
  return acc * std::polar(1.0, model_.rho0());
}

cplx FlatState::value(double xi, double s) const {
  const double eps = model_.epsilon();
  const double rho = model_.gauge().rho(eps, xi, s);
  return reduced(xi, s) * std::polar(1.0, rho / (eps * eps));
}

std::vector<cplx> sample_on_grid(const FlatState& state, const DomainGrid& grid) {
  const GaugeData& g = state.model().gauge();
  std::vector<cplx> out(grid.unknown_count(), 0.0);
  parallel_for(grid.unknown_count(), [&](std::size_t u) {
    const auto [xi, s] = g.curve().project(grid.position(grid.inside_nodes()[u]));
    if (s >= 0 && s <= g.tube().half_width()) out[u] = state.value(xi, s);
  });
  return out;
}

ComparisonReport compare(const std::vector<cplx>& psi_num, const DomainGrid& grid, const EdgeStateModel& model,
                         double M, const CompareOptions& options) {
  const double eps = model.epsilon();
  check_window(grid, eps, M);
  require(options.windows >= 4, "need at least four windows");
  const std::vector<cplx> psi = normalized(psi_num, grid);
  const GaugeData& gauge = model.gauge();
  const BoundaryCurve& curve = gauge.curve();
  const StripSampler S(grid, gauge, eps, options.resolution, options.mu_max);
  const std::size_t nc = model.components().size();
  const double k_ref = model.components()[0].k;

  // Gauge-removed samples and basis values.
  const std::size_t nx = S.n_xi(), ns = S.n_s();
  std::vector<cplx> g(nx * ns);
  std::vector<cplx> basis(nx * ns * nc);
  parallel_for(nx, [&](std::size_t j) {
    for (std::size_t k = 0; k < ns; ++k) {
      const double xi = S.xi(j), s = S.s(k);
      g[j * ns + k] = S.gauged(psi, j, k, k_ref);
      for (std::size_t c = 0; c < nc; ++c) {
        const auto& comp = model.components()[c];
        const double H = model.profile(c).value_at(s / eps);
        basis[(j * ns + k) * nc + c] =
            std::polar(H / std::sqrt(eps), model.B(c) * S.turning(j) - comp.k * xi / eps);
      }
    }
  });

  // Normalize with the strip quadrature plus the discrete mass deeper than the strip.
  double strip = 0.0, deep = 0.0;
  for (std::size_t j = 0; j < nx; ++j)
    for (std::size_t k = 0; k < ns; ++k) strip += S.weight(j, k) * std::norm(g[j * ns + k]);
  for (std::size_t u = 0; u < psi.size(); ++u)
    if (S.node_depth(u) > S.s_max()) deep += std::norm(psi[u]);
  deep *= grid.spacing() * grid.spacing();
  const double total = strip + deep;
  require(total > 0, "field vanishes on the domain");
  for (cplx& v : g) v /= std::sqrt(total);

  ComparisonReport rep;
  rep.M = M;
  rep.epsilon = eps;
  const double half = M * eps;
  const std::size_t W = options.windows;
  rep.local.resize(W);
  std::vector<double> window_mass(W), window_measure(W);
  parallel_for(W, [&](std::size_t w) {
    const double centre = curve.perimeter() * static_cast<double>(w) / static_cast<double>(W);
    const auto cols = S.window(centre, half);
    Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(nc), static_cast<Eigen::Index>(nc));
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(nc));
    double mass = 0.0;
    for (std::size_t j : cols) {
      for (std::size_t k = 0; k < ns; ++k) {
        const double wt = S.weight(j, k);
        const cplx gv = g[j * ns + k];
        mass += wt * std::norm(gv);
        for (std::size_t a = 0; a < nc; ++a) {
          const cplx ba = basis[(j * ns + k) * nc + a];
          rhs[static_cast<Eigen::Index>(a)] += wt * std::conj(ba) * gv;
          for (std::size_t b = 0; b < nc; ++b)
            G(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) +=
                wt * std::conj(ba) * basis[(j * ns + k) * nc + b];
        }
      }
    }
    const Eigen::VectorXcd c = G.ldlt().solve(rhs);
    rep.local[w].xi = centre;
    rep.local[w].coefficients.assign(c.data(), c.data() + c.size());
    window_mass[w] = mass;
    window_measure[w] = static_cast<double>(cols.size()) * S.dxi();
  });

  // Global coefficients: average of the local fits, phase carried by the dominant component.
  std::vector<cplx> C(nc, 0.0);
  double rho0 = model.rho0();
  if (options.fit) {
    std::vector<cplx> mean(nc, 0.0);
    for (const auto& lf : rep.local)
      for (std::size_t c = 0; c < nc; ++c) mean[c] += lf.coefficients[c] / static_cast<double>(W);
    std::size_t dom = 0;
    for (std::size_t c = 1; c < nc; ++c)
      if (std::abs(mean[c]) > std::abs(mean[dom])) dom = c;
    rho0 = std::arg(mean[dom]);
    double norm2 = 0.0;
    for (std::size_t c = 0; c < nc; ++c) {
      C[c] = mean[c] * std::polar(1.0, -rho0);
      norm2 += std::norm(C[c]);
    }
    if (norm2 > 1.0)
      for (cplx& v : C) v /= std::sqrt(norm2);
  } else {
    for (std::size_t c = 0; c < nc; ++c) C[c] = model.components()[c].C;
  }
  rep.C = C;
  rep.rho0 = wrap_phase(rho0);
  const cplx phase = std::polar(1.0, rho0);

  // Overlap, strip mass and windowed distances.
  cplx inner = 0.0;
  double chi_norm = 0.0;
  strip = 0.0;
  std::vector<double> col_dist(nx, 0.0), col_mass(nx, 0.0);
  for (std::size_t j = 0; j < nx; ++j) {
    for (std::size_t k = 0; k < ns; ++k) {
      const double wt = S.weight(j, k);
      cplx chi = 0.0;
      for (std::size_t c = 0; c < nc; ++c) chi += C[c] * basis[(j * ns + k) * nc + c];
      chi *= phase;
      const cplx gv = g[j * ns + k];
      inner += wt * std::conj(chi) * gv;
      chi_norm += wt * std::norm(chi);
      strip += wt * std::norm(gv);
      col_dist[j] += wt * std::norm(gv - chi);
      col_mass[j] += wt * std::norm(gv);
    }
  }
  rep.strip_mass = strip;
  rep.overlap = chi_norm > 0 ? std::min(1.0, std::abs(inner) / std::sqrt(chi_norm)) : 0.0;
  rep.windowed_distance = 0.0;
  rep.m_eps = 0.0;
  for (std::size_t w = 0; w < W; ++w) {
    const auto cols = S.window(rep.local[w].xi, half);
    double d = 0.0;
    for (std::size_t j : cols) d += col_dist[j];
    rep.windowed_distance = std::max(rep.windowed_distance, std::sqrt(d / window_measure[w]));
    const double m = window_mass[w] / window_measure[w];
    rep.m_eps = std::max(rep.m_eps, m);
    rep.profile.emplace_back(rep.local[w].xi, m);
  }
  return rep;
}

std::vector<std::pair<double, double>> boundary_mass_profile(const std::vector<cplx>& psi_num, const DomainGrid& grid,
                                                             const GaugeData& gauge, double epsilon, double M,
                                                             std::size_t windows, double mu_max) {
  check_window(grid, epsilon, M);
  require(windows >= 4, "need at least four windows");
  const std::vector<cplx> psi = normalized(psi_num, grid);
  const StripSampler S(grid, gauge, epsilon, 8.0, mu_max);
  const std::size_t nx = S.n_xi(), ns = S.n_s();
  std::vector<double> col(nx, 0.0);
  parallel_for(nx, [&](std::size_t j) {
    double acc = 0.0;
    for (std::size_t k = 0; k < ns; ++k) acc += S.weight(j, k) * S.density(psi, j, k);
    col[j] = acc;
  });
  std::vector<std::pair<double, double>> out;
  const double L = gauge.curve().perimeter();
  for (std::size_t w = 0; w < windows; ++w) {
    const double centre = L * static_cast<double>(w) / static_cast<double>(windows);
    const auto cols = S.window(centre, M * epsilon);
    double m = 0.0;
    for (std::size_t j : cols) m += col[j];
    out.emplace_back(centre, m / (static_cast<double>(cols.size()) * S.dxi()));
  }
  return out;
}

double mass_within(const std::vector<cplx>& psi, const DomainGrid& grid, double distance) {
  require(psi.size() == grid.unknown_count(), "field size does not match the grid");
  const auto& d = grid.boundary_distances();
  double in = 0.0, total = 0.0;
  for (std::size_t u = 0; u < psi.size(); ++u) {
    const double w = std::norm(psi[u]);
    total += w;
    if (d[u] <= distance) in += w;
  }
  require(total > 0, "zero field");
  return in / total;
}

void write_report_json(std::ostream& out, const ComparisonReport& r) {
  nlohmann::ordered_json j;
  j["epsilon"] = r.epsilon;
  j["M"] = r.M;
  j["windowed_distance"] = r.windowed_distance;
  j["overlap"] = r.overlap;
  j["strip_mass"] = r.strip_mass;
  j["m_eps"] = r.m_eps;
  j["rho0"] = r.rho0;
  auto& c = j["C"] = nlohmann::ordered_json::array();
  for (const cplx& v : r.C) c.push_back({{"re", v.real()}, {"im", v.imag()}});
  auto& p = j["profile"] = nlohmann::ordered_json::array();
  for (const auto& [xi, m] : r.profile) p.push_back({{"xi", xi}, {"mass", m}});
  out << j.dump(2) << "\n";
}

void write_profile_csv(std::ostream& out, const std::vector<std::pair<double, double>>& profile) {
  CsvWriter csv(out, {"xi", "mass"});
  for (const auto& [xi, m] : profile) csv.row({xi, m});
}

}  // namespace edgestates
