#include "edgestates/tridiagonal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "edgestates/error.hpp"

namespace edgestates {

std::size_t SymmetricTridiagonal::count_below(double x) const {
  const std::size_t n = diag.size();
  const double tiny = std::numeric_limits<double>::min() / std::numeric_limits<double>::epsilon();
  std::size_t count = 0;
  double q = diag[0] - x;
  if (q < 0) ++count;
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs(q) < tiny) q = -tiny;
    q = diag[i] - x - off[i - 1] * off[i - 1] / q;
    if (q < 0) ++count;
  }
  return count;
}

std::pair<double, double> SymmetricTridiagonal::spectrum_bounds() const {
  const std::size_t n = diag.size();
  double lo = std::numeric_limits<double>::max();
  double hi = std::numeric_limits<double>::lowest();
  for (std::size_t i = 0; i < n; ++i) {
    double r = 0;
    if (i > 0) r += std::abs(off[i - 1]);
    if (i + 1 < n) r += std::abs(off[i]);
    lo = std::min(lo, diag[i] - r);
    hi = std::max(hi, diag[i] + r);
  }
  return {lo, hi};
}

double SymmetricTridiagonal::eigenvalue(std::size_t index) const {
  require(index < diag.size(), "eigenvalue index out of range");
  auto [lo, hi] = spectrum_bounds();
  const double eps = std::numeric_limits<double>::epsilon();
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (hi - lo <= 2 * eps * std::max(std::abs(lo), std::abs(hi))) break;
    if (count_below(mid) > index)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<double> solve_tridiagonal(std::span<const double> sub, std::span<const double> diag,
                                      std::span<const double> super, std::span<const double> rhs) {
  // LU with partial pivoting; fill-in lives in a second super-diagonal.
  const std::size_t n = diag.size();
  std::vector<double> d(diag.begin(), diag.end());
  std::vector<double> du(n, 0.0), du2(n, 0.0), dl(n, 0.0), b(rhs.begin(), rhs.end());
  for (std::size_t i = 0; i + 1 < n; ++i) du[i] = super[i];
  for (std::size_t i = 0; i + 1 < n; ++i) dl[i] = sub[i];
  const double tiny = std::numeric_limits<double>::epsilon() * 1e-3;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (std::abs(d[i]) >= std::abs(dl[i])) {
      if (d[i] == 0) d[i] = tiny;
      const double f = dl[i] / d[i];
      dl[i] = f;
      d[i + 1] -= f * du[i];
      b[i + 1] -= f * b[i];
    } else {
      const double f = d[i] / dl[i];
      d[i] = dl[i];
      dl[i] = f;
      const double tmp = du[i];
      du[i] = d[i + 1];
      d[i + 1] = tmp - f * d[i + 1];
      if (i + 2 < n) {
        du2[i] = du[i + 1];
        du[i + 1] = -f * du[i + 1];
      }
      std::swap(b[i], b[i + 1]);
      b[i + 1] -= f * b[i];
    }
  }
  if (d[n - 1] == 0) d[n - 1] = tiny;
  std::vector<double> x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = b[ii];
    if (ii + 1 < n) s -= du[ii] * x[ii + 1];
    if (ii + 2 < n) s -= du2[ii] * x[ii + 2];
    x[ii] = s / d[ii];
  }
  return x;
}

std::vector<double> SymmetricTridiagonal::eigenvector(double lambda, int iterations) const {
  const std::size_t n = diag.size();
  std::vector<double> shifted(n);
  // Nudge the shift off the eigenvalue so the factorization stays finite.
  const double nudge = std::abs(lambda) * 1e-14 + 1e-300;
  for (std::size_t i = 0; i < n; ++i) shifted[i] = diag[i] - (lambda + nudge);
  std::vector<double> x(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 + 0.01 * std::sin(0.7 * static_cast<double>(i));
  for (int it = 0; it < iterations; ++it) {
    x = solve_tridiagonal(off, shifted, off, x);
    const double norm = std::sqrt(std::inner_product(x.begin(), x.end(), x.begin(), 0.0));
    for (double& v : x) v /= norm;
  }
  return x;
}

void SymmetricTridiagonal::multiply(std::span<const double> x, std::span<double> y) const {
  const std::size_t n = diag.size();
  for (std::size_t i = 0; i < n; ++i) {
    double s = diag[i] * x[i];
    if (i > 0) s += off[i - 1] * x[i - 1];
    if (i + 1 < n) s += off[i] * x[i + 1];
    y[i] = s;
  }
}

}  // namespace edgestates
