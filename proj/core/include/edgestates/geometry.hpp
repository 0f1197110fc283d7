#pragma once

// Closed boundary curves from analytic descriptors, arc-length parametrized and
// oriented counterclockwise. N is the outer unit normal, kappa > 0 on convex
// arcs, and the frame satisfies T' = -kappa N, N' = kappa T. Curvilinear
// coordinates are x(xi, s) = f(xi) - N(xi) s with s > 0 inside.

#include <array>
#include <cmath>
#include <iosfwd>
#include <string>
#include <vector>

namespace edgestates {

struct Vec2 {
  double x = 0.0, y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double dot(Vec2 o) const { return x * o.x + y * o.y; }
  double cross(Vec2 o) const { return x * o.y - y * o.x; }
  double norm() const { return std::hypot(x, y); }
};
inline Vec2 operator*(double s, Vec2 v) { return v * s; }

enum class CurveKind { Disk, Ellipse, FourierStar };

struct CurveDescriptor {
  CurveKind kind = CurveKind::Disk;
  double radius = 1.0;          // disk
  double a = 1.0, b = 1.0;      // ellipse semi-axes along x and y
  double r0 = 1.0;              // star: r(t) = r0 + sum_j (c_j cos jt + s_j sin jt), j = 1..
  std::vector<double> cos_coeffs, sin_coeffs;
  bool normalize = true;        // rescale to perimeter 1

  static CurveDescriptor disk(double radius, bool normalize = true);
  static CurveDescriptor ellipse(double a, double b, bool normalize = true);
  static CurveDescriptor fourier_star(double r0, std::vector<double> cos_coeffs, std::vector<double> sin_coeffs = {},
                                      bool normalize = true);
  std::string describe() const;
};

class BoundaryCurve {
 public:
  static constexpr std::size_t kMinSamples = 2048;

  // Throws SelfIntersecting or NotSmooth.
  static BoundaryCurve build(const CurveDescriptor& descriptor, std::size_t samples = kMinSamples);

  const CurveDescriptor& descriptor() const { return descriptor_; }
  double perimeter() const { return perimeter_; }
  // Factor applied to the descriptor's coordinates (1 / raw perimeter when normalized).
  double scale() const { return scale_; }

  Vec2 point(double xi) const;
  Vec2 tangent(double xi) const;
  Vec2 normal(double xi) const;
  double curvature(double xi) const;
  double curvature_derivative(double xi) const;
  // int_0^xi kappa on the periodic extension; equals 2 pi per loop.
  double curvature_integral(double xi) const;
  double total_curvature() const { return total_turning_; }
  // Recomputed int |f'(xi)| dxi over one loop (1 when normalized).
  double measured_perimeter() const;

  // Negative inside, positive outside, zero on the curve.
  double level(Vec2 p) const;
  bool inside(Vec2 p) const { return level(p) < 0; }
  double area() const { return area_; }

  double max_abs_curvature() const { return max_abs_kappa_; }
  // 1 / max |kappa|: upper bound for the tubular half-width.
  double curvature_radius_bound() const { return 1.0 / max_abs_kappa_; }
  // Axis-aligned bounding box {xmin, ymin, xmax, ymax} of the samples.
  std::array<double, 4> bounding_box() const;

  std::size_t sample_count() const { return xi_.size(); }
  const std::vector<double>& sample_xi() const { return xi_; }
  const std::vector<Vec2>& sample_points() const { return points_; }
  const std::vector<double>& sample_curvature() const { return kappa_; }

  // Nearest boundary point: returns {xi, signed depth s} with s > 0 inside.
  std::pair<double, double> project(Vec2 p) const;

  void write_csv(std::ostream& out) const;

 private:
  struct Jet {
    std::array<Vec2, 4> d;  // f, f', f'', f''' in descriptor coordinates
  };
  Jet jet(double t) const;
  double speed(double t) const;
  double raw_arclength(double t) const;
  double raw_turning(double t) const;
  double parameter_at(double xi) const;

  CurveDescriptor descriptor_;
  double scale_ = 1.0;
  double raw_length_ = 0.0;
  double perimeter_ = 0.0;
  double total_turning_ = 0.0;
  double area_ = 0.0;
  double max_abs_kappa_ = 0.0;
  std::vector<double> panel_t_, panel_length_, panel_turning_;
  std::vector<double> xi_, kappa_;
  std::vector<Vec2> points_;
};

struct CurvilinearPoint {
  double xi = 0.0;
  double s = 0.0;
};

class TubularMap {
 public:
  // half_width defaults to 0.8 / max|kappa|, shrunk until sampled injectivity holds.
  static TubularMap build(const BoundaryCurve& curve, double half_width = 0.0);

  const BoundaryCurve& curve() const { return curve_; }
  double half_width() const { return half_width_; }

  Vec2 to_cartesian(double xi, double s) const;
  // Throws OutsideTube unless 0 <= s <= half_width (|s| <= half_width when allow_exterior).
  CurvilinearPoint to_curvilinear(Vec2 p, bool allow_exterior = false) const;
  // Lame coefficient h_xi = 1 - kappa(xi) s.
  double lame(double xi, double s) const { return 1.0 - curve_.curvature(xi) * s; }

 private:
  BoundaryCurve curve_;
  double half_width_ = 0.0;
};

// Euclidean distance from an interior point to the curve. Throws OutsideDomain.
double boundary_distance(const BoundaryCurve& curve, Vec2 p);

}  // namespace edgestates
