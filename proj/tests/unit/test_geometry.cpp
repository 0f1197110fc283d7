#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "doctest.h"
#include "edgestates/error.hpp"
#include "edgestates/geometry.hpp"
#include "edgestates_acceptance/oracles.hpp"

using namespace edgestates;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("normalized disk") {
  const BoundaryCurve c = BoundaryCurve::build(CurveDescriptor::disk(3.0));
  const double R = 1.0 / (2 * kPi);
  CHECK(c.perimeter() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(c.measured_perimeter() - 1.0) < 1e-8);
  CHECK(std::abs(c.area() - kPi * R * R) < 1e-12);
  for (double xi : {0.0, 0.13, 0.5, 0.77}) {
    CHECK(std::abs(c.curvature(xi) - 2 * kPi) < 1e-8);
    const Vec2 p = c.point(xi);
    CHECK(std::abs(p.x - R * std::cos(2 * kPi * xi)) < 1e-10);
    CHECK(std::abs(p.y - R * std::sin(2 * kPi * xi)) < 1e-10);
  }
  // Outer normal and counterclockwise orientation.
  CHECK(c.normal(0.0).x == doctest::Approx(1.0));
  CHECK(c.tangent(0.0).y == doctest::Approx(1.0));
}

TEST_CASE("ellipse vertex curvature") {
  const BoundaryCurve c = BoundaryCurve::build(CurveDescriptor::ellipse(0.2, 0.1, false));
  CHECK(std::abs(c.curvature(0.0) - 20.0) < 1e-8);
  CHECK(std::abs(c.curvature(c.perimeter() / 4) - 0.1 / 0.04) < 1e-6);
  CHECK(std::abs(c.area() - kPi * 0.02) < 1e-10);
}

TEST_CASE("total curvature is 2 pi") {
  for (const auto& d : {CurveDescriptor::fourier_star(1.0, {0.0, 0.0, 0.1}), CurveDescriptor::ellipse(0.2, 0.1),
                        CurveDescriptor::fourier_star(1.0, {0.05, 0.0, 0.0, 0.08}, {0.0, 0.07})}) {
    const BoundaryCurve c = BoundaryCurve::build(d);
    CHECK(std::abs(c.curvature_integral(c.perimeter()) - 2 * kPi) < 1e-8);
    CHECK(std::abs(c.total_curvature() - 2 * kPi) < 1e-8);
    CHECK(std::abs(c.measured_perimeter() - 1.0) < 1e-8);
  }
}

TEST_CASE("frame and winding") {
  const BoundaryCurve c = BoundaryCurve::build(CurveDescriptor::fourier_star(1.0, {0.0, 0.0, 0.1}));
  double angle = 0.0, prev = std::atan2(c.tangent(0.0).y, c.tangent(0.0).x);
  for (double xi : c.sample_xi()) {
    const Vec2 t = c.tangent(xi), n = c.normal(xi);
    CHECK(std::abs(t.dot(n)) < 1e-10);
    CHECK(std::abs(t.norm() - 1.0) < 1e-10);
    CHECK(std::abs(n.norm() - 1.0) < 1e-10);
    const double a = std::atan2(t.y, t.x);
    angle += std::remainder(a - prev, 2 * kPi);
    prev = a;
  }
  const double a0 = std::atan2(c.tangent(1.0).y, c.tangent(1.0).x);
  angle += std::remainder(a0 - prev, 2 * kPi);
  CHECK(std::abs(angle - 2 * kPi) < 1e-9);
}

TEST_CASE("curvature derivative against finite differences") {
  const BoundaryCurve c = BoundaryCurve::build(CurveDescriptor::ellipse(0.2, 0.1));
  const double d = 1e-5;
  for (double xi : {0.1, 0.3, 0.62}) {
    const double fd = (c.curvature(xi + d) - c.curvature(xi - d)) / (2 * d);
    CHECK(std::abs(c.curvature_derivative(xi) - fd) < 1e-4 * std::max(1.0, std::abs(fd)));
  }
}

TEST_CASE("tubular map") {
  const BoundaryCurve disk = BoundaryCurve::build(CurveDescriptor::disk(1.0));
  const double R = 1.0 / (2 * kPi);
  CHECK(std::abs(disk.curvature_radius_bound() - R) < 1e-10);
  const TubularMap tube = TubularMap::build(disk);
  CHECK(tube.half_width() == doctest::Approx(0.8 * R));
  const Vec2 p = tube.to_cartesian(0.25, 0.05);
  CHECK(std::abs(p.x) < 1e-10);
  CHECK(std::abs(p.y - (R - 0.05)) < 1e-10);
  CHECK_THROWS_AS(TubularMap::build(disk, 1.01 * R), Error);

  const BoundaryCurve ell = BoundaryCurve::build(CurveDescriptor::ellipse(0.2, 0.1));
  const TubularMap et = TubularMap::build(ell);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double xi = u(rng), s = u(rng) * et.half_width();
    const Vec2 q = et.to_cartesian(xi, s);
    const CurvilinearPoint back = et.to_curvilinear(q);
    worst = std::max(worst, (et.to_cartesian(back.xi, back.s) - q).norm());
  }
  CHECK(worst < 1e-9);
  try {
    et.to_curvilinear({0.0, 0.0});
    FAIL("expected OutsideTube");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutsideTube);
  }
}

TEST_CASE("boundary distance") {
  const BoundaryCurve disk = BoundaryCurve::build(CurveDescriptor::disk(1.0));
  const double R = 1.0 / (2 * kPi);
  CHECK(std::abs(boundary_distance(disk, {0.0, 0.0}) - R) < 1e-10);
  CHECK(std::abs(boundary_distance(disk, {0.03, -0.04}) - (R - 0.05)) < 1e-10);
  CHECK_THROWS_AS(boundary_distance(disk, {1.0, 0.0}), Error);

  const BoundaryCurve ell = BoundaryCurve::build(CurveDescriptor::ellipse(0.2, 0.1));
  const double s = ell.scale();
  const int n = 100000;
  std::vector<double> xs(n), ys(n);
  for (int i = 0; i < n; ++i) {
    const double t = 2 * kPi * i / n;
    xs[i] = 0.2 * s * std::cos(t);
    ys[i] = 0.1 * s * std::sin(t);
  }
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> ux(-0.2 * s, 0.2 * s), uy(-0.1 * s, 0.1 * s);
  int tested = 0;
  double worst = 0.0;
  while (tested < 500) {
    const Vec2 p{ux(rng), uy(rng)};
    if (!ell.inside(p)) continue;
    worst = std::max(worst, std::abs(boundary_distance(ell, p) - oracle::brute_force_distance(xs, ys, p.x, p.y)));
    ++tested;
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("invalid curves") {
  auto code_of = [](const CurveDescriptor& d) {
    try {
      BoundaryCurve::build(d);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::IoError;
  };
  CHECK(code_of(CurveDescriptor::fourier_star(1.0, {0.0, 1.2})) == ErrorCode::SelfIntersecting);
  CHECK(code_of(CurveDescriptor::disk(-1.0)) == ErrorCode::InvalidArgument);
}

TEST_CASE("curve CSV") {
  const BoundaryCurve c = BoundaryCurve::build(CurveDescriptor::disk(1.0));
  std::ostringstream os;
  c.write_csv(os);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header == "xi,f1,f2,kappa");
  std::size_t rows = 0;
  for (std::string line; std::getline(is, line);) ++rows;
  CHECK(rows == c.sample_count());
}
