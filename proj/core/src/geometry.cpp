#include "edgestates/geometry.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "edgestates/error.hpp"
#include "edgestates/io.hpp"

namespace edgestates {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr std::size_t kPanels = 4096;

// 8-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 8> kGaussX = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                           -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                           0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGaussW = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                           0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                           0.2223810344533745, 0.1012285362903763};

template <class F>
double gauss(double a, double b, F&& f) {
  const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
  double sum = 0.0;
  for (std::size_t i = 0; i < 8; ++i) sum += kGaussW[i] * f(mid + half * kGaussX[i]);
  return sum * half;
}

Vec2 unit_derivative(double t, int order) {
  const double shift = order * 0.5 * std::numbers::pi;
  return {std::cos(t + shift), std::sin(t + shift)};
}

double wrap(double x, double period, double* turns = nullptr) {
  const double n = std::floor(x / period);
  if (turns) *turns = n;
  double r = x - n * period;
  if (r >= period) r -= period;
  if (r < 0) r = 0;
  return r;
}

bool segments_cross(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
  const double d1 = (p2 - p1).cross(q1 - p1);
  const double d2 = (p2 - p1).cross(q2 - p1);
  const double d3 = (q2 - q1).cross(p1 - q1);
  const double d4 = (q2 - q1).cross(p2 - q1);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

}  // namespace

CurveDescriptor CurveDescriptor::disk(double radius, bool normalize) {
  CurveDescriptor d;
  d.kind = CurveKind::Disk;
  d.radius = radius;
  d.normalize = normalize;
  return d;
}

CurveDescriptor CurveDescriptor::ellipse(double a, double b, bool normalize) {
  CurveDescriptor d;
  d.kind = CurveKind::Ellipse;
  d.a = a;
  d.b = b;
  d.normalize = normalize;
  return d;
}

CurveDescriptor CurveDescriptor::fourier_star(double r0, std::vector<double> cos_coeffs,
                                              std::vector<double> sin_coeffs, bool normalize) {
  CurveDescriptor d;
  d.kind = CurveKind::FourierStar;
  d.r0 = r0;
  d.cos_coeffs = std::move(cos_coeffs);
  d.sin_coeffs = std::move(sin_coeffs);
  d.normalize = normalize;
  return d;
}

std::string CurveDescriptor::describe() const {
  std::ostringstream os;
  os.precision(12);
  switch (kind) {
    case CurveKind::Disk: os << "disk(" << radius << ")"; break;
    case CurveKind::Ellipse: os << "ellipse(" << a << ", " << b << ")"; break;
    case CurveKind::FourierStar: {
      os << "fourier_star(" << r0 << "; cos";
      for (double c : cos_coeffs) os << " " << c;
      os << "; sin";
      for (double s : sin_coeffs) os << " " << s;
      os << ")";
      break;
    }
  }
  if (normalize) os << " normalized";
  return os.str();
}

BoundaryCurve::Jet BoundaryCurve::jet(double t) const {
  Jet j;
  const auto& d = descriptor_;
  switch (d.kind) {
    case CurveKind::Disk:
      for (int n = 0; n < 4; ++n) j.d[n] = unit_derivative(t, n) * d.radius;
      break;
    case CurveKind::Ellipse:
      for (int n = 0; n < 4; ++n) {
        const Vec2 e = unit_derivative(t, n);
        j.d[n] = {d.a * e.x, d.b * e.y};
      }
      break;
    case CurveKind::FourierStar: {
      // r^{(i)}(t), i = 0..3
      std::array<double, 4> r{d.r0, 0.0, 0.0, 0.0};
      const std::size_t terms = std::max(d.cos_coeffs.size(), d.sin_coeffs.size());
      for (std::size_t m = 1; m <= terms; ++m) {
        const double c = m <= d.cos_coeffs.size() ? d.cos_coeffs[m - 1] : 0.0;
        const double s = m <= d.sin_coeffs.size() ? d.sin_coeffs[m - 1] : 0.0;
        double pw = 1.0;
        for (int i = 0; i < 4; ++i) {
          const double arg = static_cast<double>(m) * t + i * 0.5 * std::numbers::pi;
          r[i] += pw * (c * std::cos(arg) + s * std::sin(arg));
          pw *= static_cast<double>(m);
        }
      }
      constexpr std::array<std::array<double, 4>, 4> binom = {
          {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}}};
      for (int n = 0; n < 4; ++n) {
        Vec2 acc;
        for (int i = 0; i <= n; ++i) acc = acc + unit_derivative(t, n - i) * (binom[n][i] * r[i]);
        j.d[n] = acc;
      }
      break;
    }
  }
  return j;
}

double BoundaryCurve::speed(double t) const { return jet(t).d[1].norm(); }

BoundaryCurve BoundaryCurve::build(const CurveDescriptor& descriptor, std::size_t samples) {
  switch (descriptor.kind) {
    case CurveKind::Disk: require(descriptor.radius > 0, "disk radius must be positive"); break;
    case CurveKind::Ellipse: require(descriptor.a > 0 && descriptor.b > 0, "ellipse semi-axes must be positive"); break;
    case CurveKind::FourierStar: require(descriptor.r0 > 0, "star base radius must be positive"); break;
  }
  for (double c : descriptor.cos_coeffs) require(std::isfinite(c), "non-finite Fourier coefficient");
  for (double c : descriptor.sin_coeffs) require(std::isfinite(c), "non-finite Fourier coefficient");
  samples = std::max(samples, kMinSamples);

  BoundaryCurve c;
  c.descriptor_ = descriptor;

  c.panel_t_.resize(kPanels + 1);
  c.panel_length_.assign(kPanels + 1, 0.0);
  c.panel_turning_.assign(kPanels + 1, 0.0);
  double min_speed = std::numeric_limits<double>::infinity(), max_speed = 0.0;
  double area2 = 0.0;
  for (std::size_t p = 0; p <= kPanels; ++p) c.panel_t_[p] = kTwoPi * static_cast<double>(p) / kPanels;
  for (std::size_t p = 0; p < kPanels; ++p) {
    const double a = c.panel_t_[p], b = c.panel_t_[p + 1];
    double len = 0.0, turn = 0.0, ar = 0.0;
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (std::size_t i = 0; i < 8; ++i) {
      const Jet j = c.jet(mid + half * kGaussX[i]);
      const double sp = j.d[1].norm();
      min_speed = std::min(min_speed, sp);
      max_speed = std::max(max_speed, sp);
      len += kGaussW[i] * sp;
      if (sp > 0) turn += kGaussW[i] * j.d[1].cross(j.d[2]) / (sp * sp);
      ar += kGaussW[i] * j.d[0].cross(j.d[1]);
    }
    c.panel_length_[p + 1] = c.panel_length_[p] + len * half;
    c.panel_turning_[p + 1] = c.panel_turning_[p] + turn * half;
    area2 += ar * half;
  }
  if (!(min_speed > 1e-9 * max_speed))
    fail(ErrorCode::NotSmooth, "curve parametrization degenerates (|f'| vanishes): " + descriptor.describe());
  if (descriptor.kind == CurveKind::FourierStar) {
    for (std::size_t i = 0; i < 4 * samples; ++i) {
      const double t = kTwoPi * static_cast<double>(i) / (4 * samples);
      if (c.jet(t).d[0].norm() <= 0 || c.jet(t).d[0].dot(unit_derivative(t, 0)) <= 0)
        fail(ErrorCode::SelfIntersecting, "star radius r(t) must stay positive: " + descriptor.describe());
    }
  }

  c.raw_length_ = c.panel_length_.back();
  c.scale_ = descriptor.normalize ? 1.0 / c.raw_length_ : 1.0;
  c.perimeter_ = c.raw_length_ * c.scale_;
  c.total_turning_ = c.panel_turning_.back();
  c.area_ = 0.5 * area2 * c.scale_ * c.scale_;
  if (!(c.area_ > 0)) fail(ErrorCode::SelfIntersecting, "curve is not counterclockwise simple: " + descriptor.describe());

  c.xi_.resize(samples);
  c.points_.resize(samples);
  c.kappa_.resize(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    const double xi = c.perimeter_ * static_cast<double>(i) / static_cast<double>(samples);
    c.xi_[i] = xi;
    c.points_[i] = c.point(xi);
    c.kappa_[i] = c.curvature(xi);
    c.max_abs_kappa_ = std::max(c.max_abs_kappa_, std::abs(c.kappa_[i]));
  }
  // Refine the curvature maximum between samples.
  for (std::size_t i = 0; i < samples; ++i) {
    const double xi = c.xi_[i] + 0.5 * c.perimeter_ / static_cast<double>(samples);
    c.max_abs_kappa_ = std::max(c.max_abs_kappa_, std::abs(c.curvature(xi)));
  }

  // Polygon self-intersection test with a bounding-box prefilter.
  const std::size_t n = samples;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 p1 = c.points_[i], p2 = c.points_[(i + 1) % n];
    const double pxmin = std::min(p1.x, p2.x), pxmax = std::max(p1.x, p2.x);
    const double pymin = std::min(p1.y, p2.y), pymax = std::max(p1.y, p2.y);
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      const Vec2 q1 = c.points_[j], q2 = c.points_[(j + 1) % n];
      if (std::max(q1.x, q2.x) < pxmin || std::min(q1.x, q2.x) > pxmax) continue;
      if (std::max(q1.y, q2.y) < pymin || std::min(q1.y, q2.y) > pymax) continue;
      if (segments_cross(p1, p2, q1, q2))
        fail(ErrorCode::SelfIntersecting, "boundary polygon self-intersects: " + descriptor.describe());
    }
  }
  if (std::abs(c.total_turning_ - kTwoPi) > 1e-6)
    fail(ErrorCode::SelfIntersecting, "tangent winding number is not one: " + descriptor.describe());
  return c;
}

double BoundaryCurve::raw_arclength(double t) const {
  double turns = 0.0;
  const double tw = wrap(t, kTwoPi, &turns);
  std::size_t p = std::min<std::size_t>(static_cast<std::size_t>(tw / kTwoPi * kPanels), kPanels - 1);
  return turns * raw_length_ + panel_length_[p] + gauss(panel_t_[p], tw, [&](double u) { return speed(u); });
}

double BoundaryCurve::raw_turning(double t) const {
  double turns = 0.0;
  const double tw = wrap(t, kTwoPi, &turns);
  std::size_t p = std::min<std::size_t>(static_cast<std::size_t>(tw / kTwoPi * kPanels), kPanels - 1);
  return turns * total_turning_ + panel_turning_[p] + gauss(panel_t_[p], tw, [&](double u) {
           const Jet j = jet(u);
           const double sp2 = j.d[1].dot(j.d[1]);
           return j.d[1].cross(j.d[2]) / sp2;
         });
}

double BoundaryCurve::parameter_at(double xi) const {
  double turns = 0.0;
  const double sigma = wrap(xi, perimeter_, &turns) / scale_;
  auto it = std::upper_bound(panel_length_.begin(), panel_length_.end(), sigma);
  std::size_t p = it == panel_length_.begin() ? 0 : static_cast<std::size_t>(it - panel_length_.begin()) - 1;
  p = std::min(p, kPanels - 1);
  const double a = panel_t_[p], b = panel_t_[p + 1];
  const double la = panel_length_[p], lb = panel_length_[p + 1];
  double t = a + (b - a) * (sigma - la) / (lb - la);
  for (int iter = 0; iter < 20; ++iter) {
    const double g = panel_length_[p] + gauss(a, t, [&](double u) { return speed(u); }) - sigma;
    const double dt = g / speed(t);
    t = std::clamp(t - dt, a, b);
    if (std::abs(dt) < 1e-15 * kTwoPi) break;
  }
  return t + turns * kTwoPi;
}

Vec2 BoundaryCurve::point(double xi) const { return jet(parameter_at(xi)).d[0] * scale_; }

Vec2 BoundaryCurve::tangent(double xi) const {
  const Vec2 d = jet(parameter_at(xi)).d[1];
  return d * (1.0 / d.norm());
}

Vec2 BoundaryCurve::normal(double xi) const {
  const Vec2 t = tangent(xi);
  return {t.y, -t.x};
}

double BoundaryCurve::curvature(double xi) const {
  const Jet j = jet(parameter_at(xi));
  const double sp = j.d[1].norm();
  return j.d[1].cross(j.d[2]) / (sp * sp * sp) / scale_;
}

double BoundaryCurve::curvature_derivative(double xi) const {
  const Jet j = jet(parameter_at(xi));
  const double sp = j.d[1].norm();
  const double c12 = j.d[1].cross(j.d[2]);
  const double dkdt = j.d[1].cross(j.d[3]) / (sp * sp * sp) - 3.0 * c12 * j.d[1].dot(j.d[2]) / std::pow(sp, 5);
  return dkdt / (scale_ * scale_ * sp);
}

double BoundaryCurve::curvature_integral(double xi) const { return raw_turning(parameter_at(xi)); }

double BoundaryCurve::measured_perimeter() const {
  // Chord length of the arc-length samples, Richardson-extrapolated in the chord count.
  auto chords = [&](std::size_t m) {
    double sum = 0.0;
    Vec2 prev = point(0.0);
    for (std::size_t i = 1; i <= m; ++i) {
      const Vec2 next = point(perimeter_ * static_cast<double>(i) / static_cast<double>(m));
      sum += (next - prev).norm();
      prev = next;
    }
    return sum;
  };
  const double coarse = chords(8192), fine = chords(16384);
  return (4.0 * fine - coarse) / 3.0;
}

double BoundaryCurve::level(Vec2 p) const {
  const Vec2 q = p * (1.0 / scale_);
  const auto& d = descriptor_;
  switch (d.kind) {
    case CurveKind::Disk: return (q.norm() - d.radius) * scale_;
    case CurveKind::Ellipse: {
      const double r = std::hypot(q.x / d.a, q.y / d.b);
      return (r - 1.0) * std::min(d.a, d.b) * scale_;
    }
    case CurveKind::FourierStar: {
      const double t = std::atan2(q.y, q.x);
      return (q.norm() - jet(t).d[0].norm()) * scale_;
    }
  }
  return 0.0;
}

std::array<double, 4> BoundaryCurve::bounding_box() const {
  std::array<double, 4> box{points_[0].x, points_[0].y, points_[0].x, points_[0].y};
  for (const Vec2& p : points_) {
    box[0] = std::min(box[0], p.x);
    box[1] = std::min(box[1], p.y);
    box[2] = std::max(box[2], p.x);
    box[3] = std::max(box[3], p.y);
  }
  return box;
}

std::pair<double, double> BoundaryCurve::project(Vec2 p) const {
  std::size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points_.size(); ++i) {
    const Vec2 d = p - points_[i];
    const double d2 = d.dot(d);
    if (d2 < best_d2) {
      best_d2 = d2;
      best = i;
    }
  }
  const double dxi = perimeter_ / static_cast<double>(points_.size());
  double xi = xi_[best];
  for (int iter = 0; iter < 60; ++iter) {
    const double t = parameter_at(xi);
    const Jet j = jet(t);
    const double sp = j.d[1].norm();
    const Vec2 f = j.d[0] * scale_;
    const Vec2 T = j.d[1] * (1.0 / sp);
    const Vec2 N{T.y, -T.x};
    const double kappa = j.d[1].cross(j.d[2]) / (sp * sp * sp) / scale_;
    const Vec2 r = p - f;
    const double g = r.dot(T);
    double gp = -1.0 - kappa * r.dot(N);
    double step = gp < -0.05 ? -g / gp : g;
    step = std::clamp(step, -dxi, dxi);
    xi += step;
    if (std::abs(step) < 1e-14 * perimeter_) break;
  }
  xi = wrap(xi, perimeter_);
  const Vec2 f = point(xi);
  const Vec2 N = normal(xi);
  return {xi, -(p - f).dot(N)};
}

void BoundaryCurve::write_csv(std::ostream& out) const {
  CsvWriter csv(out, {"xi", "f1", "f2", "kappa"});
  for (std::size_t i = 0; i < xi_.size(); ++i) csv.row({xi_[i], points_[i].x, points_[i].y, kappa_[i]});
}

TubularMap TubularMap::build(const BoundaryCurve& curve, double half_width) {
  const double bound = curve.curvature_radius_bound();
  if (half_width > 0) {
    require(half_width < bound, "tubular half-width must stay below 1/max|kappa|");
  } else {
    half_width = 0.8 * bound;
  }
  TubularMap map;
  map.curve_ = curve;
  const std::size_t m = 256;
  for (int attempt = 0; attempt < 60; ++attempt) {
    bool ok = true;
    for (std::size_t i = 0; i < m && ok; ++i) {
      const double xi = curve.perimeter() * (static_cast<double>(i) + 0.37) / m;
      for (double frac : {0.5, 1.0}) {
        const double s = frac * half_width;
        const Vec2 p = curve.point(xi) - curve.normal(xi) * s;
        const auto [xq, sq] = curve.project(p);
        double dx = std::abs(xq - xi);
        dx = std::min(dx, curve.perimeter() - dx);
        if (dx > 1e-7 * curve.perimeter() || std::abs(sq - s) > 1e-9 * curve.perimeter()) {
          ok = false;
          break;
        }
      }
    }
    if (ok) {
      map.half_width_ = half_width;
      return map;
    }
    half_width *= 0.9;
  }
  fail(ErrorCode::OutsideTube, "could not find an injective tubular neighbourhood");
}

Vec2 TubularMap::to_cartesian(double xi, double s) const { return curve_.point(xi) - curve_.normal(xi) * s; }

CurvilinearPoint TubularMap::to_curvilinear(Vec2 p, bool allow_exterior) const {
  const auto [xi, s] = curve_.project(p);
  const double tol = 1e-12 * curve_.perimeter();
  const bool inside_strip = allow_exterior ? std::abs(s) <= half_width_ + tol : (s >= -tol && s <= half_width_ + tol);
  if (!inside_strip) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "point (%.6g, %.6g) has depth %.6g outside the tube of half-width %.6g", p.x, p.y,
                  s, half_width_);
    fail(ErrorCode::OutsideTube, buf);
  }
  return {xi, s};
}

double boundary_distance(const BoundaryCurve& curve, Vec2 p) {
  if (!(curve.level(p) < 0)) fail(ErrorCode::OutsideDomain, "boundary_distance needs a point inside the domain");
  const auto [xi, s] = curve.project(p);
  (void)s;
  return (p - curve.point(xi)).norm();
}

}  // namespace edgestates
