#include "edgestates/spline.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>

#include "edgestates/error.hpp"

namespace edgestates {

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y, SplineBoundary boundary, double slope_front,
                         double slope_back)
    : x_(std::move(x)), y_(std::move(y)), periodic_(boundary == SplineBoundary::Periodic) {
  const std::size_t n = x_.size();
  require(n == y_.size(), "spline: knot/value size mismatch");
  require(n >= 4, "spline: need at least 4 knots");
  for (std::size_t i = 1; i < n; ++i) require(x_[i] > x_[i - 1], "spline: knots must increase");
  if (periodic_) require(std::abs(y_.front() - y_.back()) <= 1e-12 * (1 + std::abs(y_.front())),
                         "periodic spline: endpoint values differ");

  std::vector<double> h(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) h[i] = x_[i + 1] - x_[i];
  auto slope = [&](std::size_t i) { return (y_[i + 1] - y_[i]) / h[i]; };

  using Triplet = Eigen::Triplet<double>;
  std::vector<Triplet> entries;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  const auto idx = [](std::size_t i) { return static_cast<int>(i); };
  for (std::size_t i = 1; i + 1 < n; ++i) {
    entries.emplace_back(idx(i), idx(i - 1), h[i - 1]);
    entries.emplace_back(idx(i), idx(i), 2 * (h[i - 1] + h[i]));
    entries.emplace_back(idx(i), idx(i + 1), h[i]);
    rhs[idx(i)] = 6 * (slope(i) - slope(i - 1));
  }
  const std::size_t last = n - 1;
  switch (boundary) {
    case SplineBoundary::Natural:
      entries.emplace_back(0, 0, 1.0);
      entries.emplace_back(idx(last), idx(last), 1.0);
      break;
    case SplineBoundary::Clamped:
      entries.emplace_back(0, 0, 2 * h[0]);
      entries.emplace_back(0, 1, h[0]);
      rhs[0] = 6 * (slope(0) - slope_front);
      entries.emplace_back(idx(last), idx(last - 1), h[last - 1]);
      entries.emplace_back(idx(last), idx(last), 2 * h[last - 1]);
      rhs[idx(last)] = 6 * (slope_back - slope(last - 1));
      break;
    case SplineBoundary::NotAKnot:
      entries.emplace_back(0, 0, h[1]);
      entries.emplace_back(0, 1, -(h[0] + h[1]));
      entries.emplace_back(0, 2, h[0]);
      entries.emplace_back(idx(last), idx(last - 2), h[last - 1]);
      entries.emplace_back(idx(last), idx(last - 1), -(h[last - 2] + h[last - 1]));
      entries.emplace_back(idx(last), idx(last), h[last - 2]);
      break;
    case SplineBoundary::Periodic:
      // Row 0 wraps through knot n-2; row n-1 ties M[n-1] = M[0].
      entries.emplace_back(0, idx(last - 1), h[last - 1]);
      entries.emplace_back(0, 0, 2 * (h[last - 1] + h[0]));
      entries.emplace_back(0, 1, h[0]);
      rhs[0] = 6 * (slope(0) - slope(last - 1));
      entries.emplace_back(idx(last), idx(last), 1.0);
      entries.emplace_back(idx(last), 0, -1.0);
      break;
  }
  Eigen::SparseMatrix<double> a(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  a.setFromTriplets(entries.begin(), entries.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) fail(ErrorCode::InvalidArgument, "spline: singular system");
  Eigen::VectorXd m = lu.solve(rhs);
  m_.assign(m.data(), m.data() + n);

  cumulative_.assign(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double hi = h[i];
    const double b = slope(i) - hi * (2 * m_[i] + m_[i + 1]) / 6;
    cumulative_[i + 1] =
        cumulative_[i] + y_[i] * hi + b * hi * hi / 2 + m_[i] * hi * hi * hi / 6 + (m_[i + 1] - m_[i]) * hi * hi * hi / 24;
  }
}

std::size_t CubicSpline::locate(double& x, double& periods) const {
  periods = 0;
  if (periodic_) {
    const double period = x_.back() - x_.front();
    periods = std::floor((x - x_.front()) / period);
    x -= periods * period;
    if (x >= x_.back()) x = x_.front();
  }
  auto it = std::upper_bound(x_.begin(), x_.end(), x);
  std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
  return std::min(i, x_.size() - 2);
}

double CubicSpline::value(double x) const {
  double periods;
  const std::size_t i = locate(x, periods);
  const double h = x_[i + 1] - x_[i];
  const double t = x - x_[i];
  const double b = (y_[i + 1] - y_[i]) / h - h * (2 * m_[i] + m_[i + 1]) / 6;
  return y_[i] + t * (b + t * (m_[i] / 2 + t * (m_[i + 1] - m_[i]) / (6 * h)));
}

double CubicSpline::derivative(double x) const {
  double periods;
  const std::size_t i = locate(x, periods);
  const double h = x_[i + 1] - x_[i];
  const double t = x - x_[i];
  const double b = (y_[i + 1] - y_[i]) / h - h * (2 * m_[i] + m_[i + 1]) / 6;
  return b + t * (m_[i] + t * (m_[i + 1] - m_[i]) / (2 * h));
}

double CubicSpline::second_derivative(double x) const {
  double periods;
  const std::size_t i = locate(x, periods);
  const double h = x_[i + 1] - x_[i];
  const double t = x - x_[i];
  return m_[i] + t * (m_[i + 1] - m_[i]) / h;
}

double CubicSpline::integral(double x) const {
  double periods;
  const std::size_t i = locate(x, periods);
  const double h = x_[i + 1] - x_[i];
  const double t = x - x_[i];
  const double b = (y_[i + 1] - y_[i]) / h - h * (2 * m_[i] + m_[i + 1]) / 6;
  const double partial = y_[i] * t + b * t * t / 2 + m_[i] * t * t * t / 6 + (m_[i + 1] - m_[i]) * t * t * t * t / (24 * h);
  return periods * cumulative_.back() + cumulative_[i] + partial;
}

}  // namespace edgestates
