#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "edgestates/dispersion.hpp"
#include "edgestates/geometry.hpp"

namespace edgestates::cli {

struct CurveBlock {
  std::string kind = "disk";  // disk | ellipse | star
  double radius = 1.0;
  double a = 1.0, b = 0.5;
  double r0 = 1.0;
  std::vector<double> cos_coeffs, sin_coeffs;
  bool normalize = true;

  CurveDescriptor descriptor() const;
  bool operator==(const CurveBlock&) const = default;
};

struct IntRange {
  int lo = 0, hi = 0;
  bool operator==(const IntRange&) const = default;
};

struct ExperimentConfig {
  CurveBlock curve;

  // [run]
  std::vector<double> epsilons{0.05};
  std::string output = "out";
  unsigned long seed = 12345;

  // [gap]
  int gap_N = 1;
  double gap_lambda = 2.0;
  double gap_delta = 0.2;

  // [branches]
  IntRange branch_l{1, 1};
  double k_min = -10.0, k_max = 4.0;
  double k_step = 0.05;

  // [grid]
  double poisson_h = 0.0;  // 0: automatic
  double h_factor = 6.0;   // 2D grid spacing eps / h_factor

  // [window]
  std::string window_policy = "inv_sqrt";  // inv_sqrt | constant
  double window_M = 4.0;

  // [solve2d]
  int count = 6;
  double target = 0.0;  // scaled energy eps^2 sigma; 0 picks the prediction nearest gap lambda
  double inner_tolerance = 1e-10;
  double residual_tolerance = 1e-8;

  // [radial]
  std::optional<IntRange> radial_m;  // unset: edge range derived from the flux
  int radial_levels = 1;
  bool radial_field = true;
  int radial_cells = 0;

  GapWindow gap() const { return {gap_N, gap_lambda, gap_delta}; }
  double window_factor(double epsilon) const;
  // Throws ConfigError.
  void validate() const;

  bool operator==(const ExperimentConfig&) const = default;
};

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::string& path);
void write_config(std::ostream& out, const ExperimentConfig& config);
std::string config_text(const ExperimentConfig& config);

// Shortest text that parses back to the same double.
std::string shortest(double value);
IntRange parse_int_range(const std::string& text);
std::pair<double, double> parse_real_range(const std::string& text);
std::vector<double> parse_list(const std::string& text);

}  // namespace edgestates::cli
