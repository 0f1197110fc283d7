#include "edgestates/domain_grid.hpp"

#include <cmath>
#include <limits>
#include <mutex>

#include "edgestates/error.hpp"
#include "edgestates/parallel.hpp"

namespace edgestates {

struct DomainGrid::DistanceCache {
  std::once_flag once;
  std::vector<double> values;
};

namespace {

// Root of the level function on the segment p (inside) -> q (outside), as a fraction of |q - p|.
double root_fraction(const DomainGrid::LevelFunction& level, Vec2 p, Vec2 q) {
  double a = 0.0, b = 1.0;
  double fa = level(p), fb = level(q);
  if (!(fa < 0) || !(fb >= 0)) fail(ErrorCode::MaskMismatch, "cut search is not bracketed by the mask");
  for (int iter = 0; iter < 100 && b - a > 1e-15; ++iter) {
    // Regula falsi with bisection safeguard.
    double m = a - fa * (b - a) / (fb - fa);
    if (!(m > a + 0.01 * (b - a) && m < b - 0.01 * (b - a))) m = 0.5 * (a + b);
    const double fm = level(p + (q - p) * m);
    if (fm < 0) {
      a = m;
      fa = fm;
    } else {
      b = m;
      fb = fm;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

DomainGrid DomainGrid::build(const BoundaryCurve& curve, double h, int margin) {
  require(h > 0, "grid spacing must be positive");
  const auto box = curve.bounding_box();
  auto shared = std::make_shared<const BoundaryCurve>(curve);
  DomainGrid g = from_level([shared](Vec2 p) { return shared->level(p); }, box[0], box[1], box[2], box[3], h, margin);
  g.curve_ = shared;
  return g;
}

DomainGrid DomainGrid::from_level(LevelFunction level, double x0, double y0, double x1, double y1, double h,
                                  int margin) {
  require(h > 0, "grid spacing must be positive");
  require(x1 > x0 && y1 > y0, "grid box is empty");
  const double cells_x = (x1 - x0) / h, cells_y = (y1 - y0) / h;
  require(cells_x < 2e4 && cells_y < 2e4, "grid too large");
  DomainGrid g;
  g.level_ = std::move(level);
  g.h_ = h;
  // Centre the box so the grid is symmetric about the box centre.
  const int ix = static_cast<int>(std::ceil(cells_x)) + 2 * margin;
  const int iy = static_cast<int>(std::ceil(cells_y)) + 2 * margin;
  g.nx_ = ix + 1;
  g.ny_ = iy + 1;
  g.x0_ = 0.5 * (x0 + x1) - 0.5 * ix * h;
  g.y0_ = 0.5 * (y0 + y1) - 0.5 * iy * h;
  g.distances_ = std::make_shared<DistanceCache>();
  g.finish(margin);
  return g;
}

std::size_t DomainGrid::neighbour(std::size_t n, Direction d) const {
  const int i = static_cast<int>(n % nx_), j = static_cast<int>(n / nx_);
  switch (d) {
    case East: return i + 1 < nx_ ? n + 1 : std::numeric_limits<std::size_t>::max();
    case West: return i > 0 ? n - 1 : std::numeric_limits<std::size_t>::max();
    case North: return j + 1 < ny_ ? n + nx_ : std::numeric_limits<std::size_t>::max();
    case South: return j > 0 ? n - nx_ : std::numeric_limits<std::size_t>::max();
  }
  return std::numeric_limits<std::size_t>::max();
}

void DomainGrid::finish(int margin_check) {
  const std::size_t total = node_count();
  std::vector<double> lv(total);
  parallel_for(static_cast<std::size_t>(ny_), [&](std::size_t j) {
    for (int i = 0; i < nx_; ++i) lv[node(i, static_cast<int>(j))] = level_(position(i, static_cast<int>(j)));
  });
  unknown_.assign(total, -1);
  for (std::size_t n = 0; n < total; ++n) {
    if (lv[n] < 0) {
      const int i = static_cast<int>(n % nx_), j = static_cast<int>(n / nx_);
      if (margin_check > 0 && (i == 0 || j == 0 || i == nx_ - 1 || j == ny_ - 1))
        fail(ErrorCode::MaskMismatch, "domain touches the grid box edge");
      unknown_[n] = static_cast<long>(nodes_.size());
      nodes_.push_back(n);
    }
  }
  if (nodes_.empty()) fail(ErrorCode::MaskMismatch, "grid has no interior nodes");
  cuts_.assign(nodes_.size(), {1.0, 1.0, 1.0, 1.0});
  parallel_for(nodes_.size(), [&](std::size_t u) {
    const std::size_t n = nodes_[u];
    for (int d = 0; d < 4; ++d) {
      const std::size_t m = neighbour(n, static_cast<Direction>(d));
      if (m == std::numeric_limits<std::size_t>::max()) {
        cuts_[u][d] = 1.0;  // box edge treated as boundary at one cell
        continue;
      }
      if (lv[m] < 0) continue;
      cuts_[u][d] = std::max(root_fraction(level_, position(n), position(m)), 1e-12);
    }
  });
  std::size_t isolated = 0;
  for (std::size_t u = 0; u < nodes_.size(); ++u) {
    bool any = false;
    for (int d = 0; d < 4; ++d) {
      const std::size_t m = neighbour(nodes_[u], static_cast<Direction>(d));
      if (m != std::numeric_limits<std::size_t>::max() && unknown_[m] >= 0) any = true;
    }
    if (!any) ++isolated;
  }
  if (isolated == nodes_.size() && nodes_.size() > 1) fail(ErrorCode::MaskMismatch, "mask has no connected nodes");
}

double DomainGrid::mask_area() const {
  // Each cell's inside part is the polygon obtained by clipping the square with the level set,
  // using cut points on the edges where the corner levels change sign.
  double area = 0.0;
  for (int j = 0; j + 1 < ny_; ++j) {
    for (int i = 0; i + 1 < nx_; ++i) {
      const std::array<Vec2, 4> c = {position(i, j), position(i + 1, j), position(i + 1, j + 1), position(i, j + 1)};
      const std::array<std::size_t, 4> id = {node(i, j), node(i + 1, j), node(i + 1, j + 1), node(i, j + 1)};
      int count = 0;
      for (auto k : id) count += unknown_[k] >= 0;
      if (count == 0) continue;
      if (count == 4) {
        area += h_ * h_;
        continue;
      }
      std::vector<Vec2> poly;
      for (int e = 0; e < 4; ++e) {
        const int f = (e + 1) % 4;
        const bool in_e = unknown_[id[e]] >= 0, in_f = unknown_[id[f]] >= 0;
        if (in_e) poly.push_back(c[e]);
        if (in_e != in_f) {
          const Vec2 p = in_e ? c[e] : c[f], q = in_e ? c[f] : c[e];
          const double t = root_fraction(level_, p, q);
          poly.push_back(p + (q - p) * t);
        }
      }
      double a2 = 0.0;
      for (std::size_t k = 0; k < poly.size(); ++k) a2 += poly[k].cross(poly[(k + 1) % poly.size()]);
      area += 0.5 * std::abs(a2);
    }
  }
  return area;
}

const std::vector<double>& DomainGrid::boundary_distances() const {
  if (!curve_) fail(ErrorCode::InvalidArgument, "boundary distances need a curve-backed grid");
  std::call_once(distances_->once, [&] {
    std::vector<double> d(nodes_.size());
    parallel_for(nodes_.size(), [&](std::size_t u) { d[u] = boundary_distance(*curve_, position(nodes_[u])); });
    distances_->values = std::move(d);
  });
  return distances_->values;
}

}  // namespace edgestates
