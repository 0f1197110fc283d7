#include "edgestates/dispersion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "edgestates/error.hpp"
#include "edgestates/io.hpp"
#include "edgestates/oscillator.hpp"
#include "edgestates/parallel.hpp"
#include "json.hpp"

namespace edgestates {

namespace {

constexpr double kRootTolerance = 1e-8;

double b_from(const BranchPoint& p) {
  if (!(p.nu_prime > kGroupVelocityFloor)) return std::numeric_limits<double>::quiet_NaN();
  return -p.moment / p.nu_prime;
}

}  // namespace

double DispersionBranch::B_at(double kk) const {
  if (B_spline.empty() || kk < k_B_min) return std::numeric_limits<double>::quiet_NaN();
  return B_spline(kk);
}

DispersionBranch build_branch(int l, double k_min, double k_max, double step, const BranchOptions& options) {
  require(l >= 1, "branch index must be >= 1");
  require(k_min < k_max, "build_branch: k_min must be below k_max");
  require(step > 0, "build_branch: step must be positive");
  const auto intervals = static_cast<std::size_t>(std::llround((k_max - k_min) / step));
  require(intervals >= 3, "build_branch: need at least 3 intervals");
  const double dk = (k_max - k_min) / static_cast<double>(intervals);

  DispersionBranch b;
  b.l = l;
  b.oscillator_h = options.oscillator_h;
  const std::size_t n = intervals + 1;
  b.k.resize(n);
  for (std::size_t i = 0; i < n; ++i) b.k[i] = k_min + dk * static_cast<double>(i);
  b.k.back() = k_max;

  std::vector<BranchPoint> pts(n);
  parallel_for(n, [&](std::size_t i) { pts[i] = branch_point(l, b.k[i], options.oscillator_h); });

  b.nu.resize(n);
  b.nu_prime.resize(n);
  b.B.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    b.nu[i] = pts[i].nu;
    b.nu_prime[i] = pts[i].nu_prime;
    b.B[i] = b_from(pts[i]);
  }
  // Where the branch is flat to machine precision, decreases at the noise
  // level are not monotonicity failures.
  for (std::size_t i = 1; i < n; ++i) {
    const double noise = 64 * std::numeric_limits<double>::epsilon() * std::abs(b.nu[i]) + 4 * pts[i].nu_change;
    if (b.nu[i] < b.nu[i - 1] - noise)
      fail(ErrorCode::NonMonotone, "branch " + std::to_string(l) + " decreases at k = " + std::to_string(b.k[i]));
    if (b.nu_prime[i] < -noise - kGroupVelocityFloor)
      fail(ErrorCode::NonMonotone, "branch " + std::to_string(l) + " has nu' < 0 at k = " + std::to_string(b.k[i]));
  }

  b.nu_spline = CubicSpline(b.k, b.nu, SplineBoundary::Clamped, b.nu_prime.front(), b.nu_prime.back());
  b.nu_prime_spline = CubicSpline(b.k, b.nu_prime, SplineBoundary::NotAKnot);

  std::size_t first_b = 0;
  for (std::size_t i = n; i-- > 0;)
    if (std::isnan(b.B[i])) {
      first_b = i + 1;
      break;
    }
  if (n - first_b >= 4) {
    std::vector<double> kb(b.k.begin() + static_cast<long>(first_b), b.k.end());
    std::vector<double> bb(b.B.begin() + static_cast<long>(first_b), b.B.end());
    b.k_B_min = kb.front();
    b.B_spline = CubicSpline(std::move(kb), std::move(bb), SplineBoundary::NotAKnot);
  } else {
    b.k_B_min = std::numeric_limits<double>::infinity();
  }

  if (options.verify_midpoints) {
    std::vector<double> err(n - 1);
    parallel_for(n - 1, [&](std::size_t i) {
      const double km = 0.5 * (b.k[i] + b.k[i + 1]);
      err[i] = std::abs(b.nu_spline(km) - extrapolated_eigenvalue(l, km, options.oscillator_h));
    });
    b.max_midpoint_error = *std::max_element(err.begin(), err.end());
    if (b.max_midpoint_error > options.midpoint_tolerance)
      fail(ErrorCode::GridTooCoarse, "branch spline midpoint error " + std::to_string(b.max_midpoint_error) +
                                         " exceeds " + std::to_string(options.midpoint_tolerance));
  }
  return b;
}

double solve_wavenumber(const DispersionBranch& branch, double lambda) {
  const double inf_nu = 2.0 * branch.l - 1.0;
  if (lambda <= inf_nu)
    fail(ErrorCode::BelowBranch, "lambda = " + std::to_string(lambda) + " is not above inf nu_" +
                                     std::to_string(branch.l) + " = " + std::to_string(inf_nu));
  if (lambda > branch.nu.back())
    fail(ErrorCode::OutOfRange, "lambda = " + std::to_string(lambda) + " exceeds nu at k_max");
  if (lambda < branch.nu.front())
    fail(ErrorCode::OutOfRange, "lambda = " + std::to_string(lambda) + " is below nu at k_min; extend the branch");

  double lo = branch.k_min(), hi = branch.k_max();
  for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (branch.nu_at(mid) < lambda)
      lo = mid;
    else
      hi = mid;
  }
  // Newton polish on direct solves; the spline only seeds.
  double k = 0.5 * (lo + hi);
  for (int it = 0; it < 20; ++it) {
    const BranchPoint p = branch_point(branch.l, k, branch.oscillator_h);
    const double r = p.nu - lambda;
    if (std::abs(r) < 0.1 * kRootTolerance) break;
    if (!(p.nu_prime > 0)) fail(ErrorCode::OutOfRange, "flat branch: cannot polish root");
    k -= r / p.nu_prime;
  }
  const double residual = std::abs(extrapolated_eigenvalue(branch.l, k, branch.oscillator_h) - lambda);
  if (residual >= kRootTolerance)
    fail(ErrorCode::OutOfRange, "wavenumber root did not reach tolerance (residual " + std::to_string(residual) + ")");
  return k;
}

double coefficient_B(int l, double k, double oscillator_h) {
  const BranchPoint p = branch_point(l, k, oscillator_h);
  return -p.moment / p.nu_prime;
}

void GapWindow::validate() const {
  require(N >= 1, "gap index N must be >= 1");
  require(delta > 0, "gap delta must be positive");
  require(lambda > lower() && lambda < upper(), "gap lambda must lie in (2N - 1, 2N + 1)");
  const double dist = std::min(lambda - lower(), upper() - lambda);
  require(dist >= delta, "gap lambda is closer than delta to a Landau level");
}

EigenvaluePrediction predict_at(int l, long n, double epsilon, double oscillator_h) {
  require(epsilon > 0 && epsilon < 0.5, "epsilon must lie in (0, 0.5)");
  EigenvaluePrediction p;
  p.l = l;
  p.n = n;
  p.epsilon = epsilon;
  p.q = 2.0 * std::numbers::pi * epsilon * static_cast<double>(n);
  const BranchPoint bp = branch_point(l, p.q, oscillator_h);
  p.nu = bp.nu;
  p.nu_prime = bp.nu_prime;
  p.B = -bp.moment / bp.nu_prime;
  p.lambda_pred = p.nu / (epsilon * epsilon) + 2.0 * std::numbers::pi * p.nu_prime * p.B / epsilon;
  return p;
}

std::vector<EigenvaluePrediction> predict_eigenvalues(const std::vector<DispersionBranch>& branches,
                                                      const GapWindow& window, double epsilon,
                                                      std::optional<std::pair<double, double>> energy_range) {
  require(epsilon > 0 && epsilon < 0.5, "epsilon must lie in (0, 0.5)");
  window.validate();
  const double lo = energy_range ? energy_range->first : window.lower();
  const double hi = energy_range ? energy_range->second : window.upper();
  const double dq = 2.0 * std::numbers::pi * epsilon;

  struct Candidate {
    const DispersionBranch* branch;
    long n;
  };
  std::vector<Candidate> candidates;
  for (const auto& b : branches) {
    if (b.l > window.N) continue;
    const long n_lo = static_cast<long>(std::ceil(b.k_min() / dq - 1e-12));
    const long n_hi = static_cast<long>(std::floor(b.k_max() / dq + 1e-12));
    for (long n = n_lo; n <= n_hi; ++n) {
      const double nu = b.nu_at(dq * static_cast<double>(n));
      // Spline prefilter with a margin; the direct solve below decides.
      if (nu >= lo - 1e-4 && nu <= hi + 1e-4) candidates.push_back({&b, n});
    }
  }
  std::vector<EigenvaluePrediction> out(candidates.size());
  parallel_for(candidates.size(), [&](std::size_t i) {
    out[i] = predict_at(candidates[i].branch->l, candidates[i].n, epsilon, candidates[i].branch->oscillator_h);
  });
  std::erase_if(out, [&](const EigenvaluePrediction& p) { return p.nu < lo - 1e-9 || p.nu > hi + 1e-9; });
  if (out.empty()) fail(ErrorCode::EmptyWindow, "no quantized wavenumber lands in the window");
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.lambda_pred != b.lambda_pred) return a.lambda_pred < b.lambda_pred;
    return a.l < b.l;
  });
  return out;
}

void write_branch_csv(std::ostream& out, const std::vector<DispersionBranch>& branches) {
  CsvWriter csv(out, {"l", "k", "nu", "nu_prime", "B"});
  for (const auto& b : branches)
    for (std::size_t i = 0; i < b.k.size(); ++i) csv.row({double(b.l), b.k[i], b.nu[i], b.nu_prime[i], b.B[i]});
}

void write_predictions_json(std::ostream& out, const std::vector<EigenvaluePrediction>& predictions) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& p : predictions)
    arr.push_back({{"l", p.l}, {"n", p.n}, {"q", p.q}, {"epsilon", p.epsilon}, {"nu", p.nu}, {"nu_prime", p.nu_prime},
                   {"B", p.B}, {"lambda_pred", p.lambda_pred}});
  out << arr.dump(2) << '\n';
}

}  // namespace edgestates
