#include "edgestates/oscillator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "edgestates/error.hpp"
#include "edgestates/tridiagonal.hpp"

namespace edgestates {

namespace {

constexpr double kResidualTolerance = 1e-6;
constexpr double kTailTolerance = 1e-8;
// Fewer than ~12 nodes per local oscillation is treated as unresolved.
constexpr double kMaxPhasePerNode = 0.5;

SymmetricTridiagonal oscillator_matrix(double k, const HalfLineGrid& grid) {
  const double h = grid.spacing();
  const std::size_t interior = grid.n_points - 2;
  SymmetricTridiagonal t;
  t.diag.resize(interior);
  t.off.assign(interior - 1, -1.0 / (h * h));
  for (std::size_t i = 0; i < interior; ++i) {
    const double mu = h * static_cast<double>(i + 1);
    t.diag[i] = 2.0 / (h * h) + (mu + k) * (mu + k);
  }
  return t;
}

}  // namespace

HalfLineGrid HalfLineGrid::for_wavenumber(double k, double h) {
  require(h > 0, "grid spacing must be positive");
  const double extent = std::max(20.0, std::abs(k) + 12.0);
  const auto intervals = static_cast<std::size_t>(std::ceil(extent / h - 1e-9));
  return {h * static_cast<double>(intervals), intervals + 1};
}

void HalfLineGrid::validate(double k) const {
  require(n_points >= 64, "half-line grid needs at least 64 points");
  require(mu_max > 0, "half-line grid extent must be positive");
  require(mu_max >= std::abs(k) + 12.0 - 1e-9,
          "half-line grid too short for k = " + std::to_string(k) + " (need mu_max >= |k| + 12)");
}

double OscillatorEigenpair::value_at(double mu) const {
  if (mu <= 0 || mu >= mu_max()) return 0.0;
  const double u = mu / h;
  const auto n = static_cast<long>(H.size());
  long i = static_cast<long>(std::floor(u));
  // Four-point Lagrange stencil i-1..i+2, clipped to the grid.
  long first = std::clamp(i - 1, 0L, n - 4);
  double result = 0.0;
  for (long a = 0; a < 4; ++a) {
    double w = 1.0;
    for (long b = 0; b < 4; ++b)
      if (b != a) w *= (u - static_cast<double>(first + b)) / static_cast<double>(a - b);
    result += w * H[static_cast<std::size_t>(first + a)];
  }
  return result;
}

std::vector<OscillatorEigenpair> solve_oscillator(double k, int l_max, const HalfLineGrid& grid) {
  require(l_max >= 1, "l_max must be at least 1");
  grid.validate(k);
  const double h = grid.spacing();
  const SymmetricTridiagonal t = oscillator_matrix(k, grid);
  const std::size_t interior = t.size();

  std::vector<OscillatorEigenpair> pairs;
  pairs.reserve(static_cast<std::size_t>(l_max));
  std::vector<double> applied(interior);
  for (int l = 1; l <= l_max; ++l) {
    OscillatorEigenpair p;
    p.l = l;
    p.k = k;
    p.h = h;
    p.nu = t.eigenvalue(static_cast<std::size_t>(l - 1));
    std::vector<double> v = t.eigenvector(p.nu);
    // One Gram-Schmidt pass against the lower eigenvectors.
    for (const auto& lower : pairs) {
      double dot = 0;
      for (std::size_t i = 0; i < interior; ++i) dot += v[i] * lower.H[i + 1] * std::sqrt(h);
      for (std::size_t i = 0; i < interior; ++i) v[i] -= dot * lower.H[i + 1] * std::sqrt(h);
    }
    const double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
    const double sign = v[0] >= 0 ? 1.0 : -1.0;
    for (double& x : v) x *= sign / norm;

    t.multiply(v, applied);
    double r2 = 0;
    for (std::size_t i = 0; i < interior; ++i) r2 += (applied[i] - p.nu * v[i]) * (applied[i] - p.nu * v[i]);
    p.residual = std::sqrt(r2);

    p.H.assign(grid.n_points, 0.0);
    const double scale = 1.0 / std::sqrt(h);
    for (std::size_t i = 0; i < interior; ++i) p.H[i + 1] = v[i] * scale;

    if (p.residual > kResidualTolerance)
      fail(ErrorCode::GridTooCoarse, "oscillator residual " + std::to_string(p.residual) + " exceeds tolerance");
    if (h * std::sqrt(std::max(p.nu, 1.0)) > kMaxPhasePerNode)
      fail(ErrorCode::GridTooCoarse, "oscillator grid spacing does not resolve nu = " + std::to_string(p.nu));
    if (std::abs(p.H[grid.n_points - 2]) > kTailTolerance)
      fail(ErrorCode::GridTooShort, "eigenfunction has not decayed at mu_max = " + std::to_string(grid.mu_max));
    pairs.push_back(std::move(p));
  }
  for (std::size_t i = 1; i < pairs.size(); ++i)
    if (!(pairs[i].nu > pairs[i - 1].nu)) fail(ErrorCode::GridTooCoarse, "oscillator eigenvalues not simple");
  return pairs;
}

double eigenvalue_derivative(const OscillatorEigenpair& pair) {
  double s = 0;
  for (std::size_t j = 1; j + 1 < pair.H.size(); ++j) {
    const double mu = pair.h * static_cast<double>(j);
    s += (mu + pair.k) * pair.H[j] * pair.H[j];
  }
  return 2.0 * pair.h * s;
}

double tail_mass(const OscillatorEigenpair& pair, double R, int m) {
  require(R > 0, "tail_mass: R must be positive");
  require(m >= 0, "tail_mass: m must be non-negative");
  double s = 0;
  for (std::size_t j = 1; j + 1 < pair.H.size(); ++j) {
    const double mu = pair.h * static_cast<double>(j);
    if (std::abs(mu + pair.k) > R) s += pair.H[j] * pair.H[j];
  }
  return std::pow(R, 2 * m) * pair.h * s;
}

double boundary_moment(const OscillatorEigenpair& pair) {
  const double k = pair.k;
  double s = 0;
  for (std::size_t j = 1; j + 1 < pair.H.size(); ++j) {
    const double mu = pair.h * static_cast<double>(j);
    s += mu * ((mu + k) * (mu + k) + k * k) * pair.H[j] * pair.H[j];
  }
  return pair.h * s;
}

BranchPoint branch_point(int l, double k, double h) {
  const HalfLineGrid coarse = HalfLineGrid::for_wavenumber(k, h);
  const HalfLineGrid fine = coarse.refined();
  const auto pc = solve_oscillator(k, l, coarse);
  const auto pf = solve_oscillator(k, l, fine);
  const auto& c = pc.back();
  const auto& f = pf.back();
  auto extrapolate = [](double coarse_v, double fine_v) { return (4.0 * fine_v - coarse_v) / 3.0; };
  BranchPoint b;
  b.l = l;
  b.k = k;
  b.nu = extrapolate(c.nu, f.nu);
  b.nu_prime = extrapolate(eigenvalue_derivative(c), eigenvalue_derivative(f));
  b.moment = extrapolate(boundary_moment(c), boundary_moment(f));
  b.nu_change = std::abs(b.nu - f.nu);
  return b;
}

double extrapolated_eigenvalue(int l, double k, double h) { return branch_point(l, k, h).nu; }

}  // namespace edgestates
