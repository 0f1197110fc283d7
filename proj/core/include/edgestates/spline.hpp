#pragma once

#include <span>
#include <vector>

namespace edgestates {

enum class SplineBoundary { Natural, NotAKnot, Clamped, Periodic };

// Cubic spline on increasing knots. Periodic splines require y.front() == y.back()
// and evaluate on the periodic extension of [x.front(), x.back()).
class CubicSpline {
 public:
  CubicSpline() = default;
  CubicSpline(std::vector<double> x, std::vector<double> y, SplineBoundary boundary = SplineBoundary::NotAKnot,
              double slope_front = 0.0, double slope_back = 0.0);

  double operator()(double x) const { return value(x); }
  double value(double x) const;
  double derivative(double x) const;
  double second_derivative(double x) const;
  // Integral of the spline from x.front() to x (periodic extension when periodic).
  double integral(double x) const;

  bool empty() const { return x_.empty(); }
  double front() const { return x_.front(); }
  double back() const { return x_.back(); }
  std::span<const double> knots() const { return x_; }
  std::span<const double> values() const { return y_; }

 private:
  std::size_t locate(double& x, double& periods) const;

  std::vector<double> x_, y_, m_, cumulative_;
  bool periodic_ = false;
};

}  // namespace edgestates
