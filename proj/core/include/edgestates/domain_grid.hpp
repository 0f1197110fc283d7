#pragma once

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "edgestates/geometry.hpp"

namespace edgestates {

// Uniform Cartesian grid over a box with an inside mask. Node (i, j) sits at
// (x0 + i h, y0 + j h); nodes are stored row-major with i fastest.
class DomainGrid {
 public:
  enum Direction { East = 0, West = 1, North = 2, South = 3 };
  using LevelFunction = std::function<double(Vec2)>;

  // Covers the curve's bounding box with a margin of `margin` cells.
  static DomainGrid build(const BoundaryCurve& curve, double h, int margin = 4);
  // Generic domain {level < 0} inside the box [x0, x1] x [y0, y1].
  static DomainGrid from_level(LevelFunction level, double x0, double y0, double x1, double y1, double h,
                               int margin = 2);

  double spacing() const { return h_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t node_count() const { return static_cast<std::size_t>(nx_) * ny_; }
  std::size_t node(int i, int j) const { return static_cast<std::size_t>(j) * nx_ + i; }
  Vec2 position(int i, int j) const { return {x0_ + i * h_, y0_ + j * h_}; }
  Vec2 position(std::size_t n) const { return position(static_cast<int>(n % nx_), static_cast<int>(n / nx_)); }
  double x0() const { return x0_; }
  double y0() const { return y0_; }

  bool inside(std::size_t n) const { return unknown_[n] >= 0; }
  // Unknown index of a node, -1 outside.
  long unknown(std::size_t n) const { return unknown_[n]; }
  std::size_t unknown_count() const { return nodes_.size(); }
  const std::vector<std::size_t>& inside_nodes() const { return nodes_; }
  // Neighbour node in a direction, or SIZE_MAX at the box edge.
  std::size_t neighbour(std::size_t n, Direction d) const;

  // Distance to the boundary along the axis in units of h, in (0, 1]; 1 when the neighbour is inside.
  double cut(std::size_t unknown_index, Direction d) const { return cuts_[unknown_index][d]; }

  double level(Vec2 p) const { return level_(p); }
  const BoundaryCurve* curve() const { return curve_.get(); }

  // Area of {level < 0} by marching squares with root-refined cut points.
  double mask_area() const;
  // Euclidean distance to the boundary at each unknown (computed on first use; needs a curve).
  const std::vector<double>& boundary_distances() const;

 private:
  void finish(int margin_check);

  LevelFunction level_;
  std::shared_ptr<const BoundaryCurve> curve_;
  double h_ = 0.0, x0_ = 0.0, y0_ = 0.0;
  int nx_ = 0, ny_ = 0;
  std::vector<long> unknown_;
  std::vector<std::size_t> nodes_;
  std::vector<std::array<double, 4>> cuts_;
  struct DistanceCache;
  std::shared_ptr<DistanceCache> distances_;
};

}  // namespace edgestates
