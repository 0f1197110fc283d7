#include "edgestates_cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "edgestates/error.hpp"

namespace edgestates::cli {

namespace pt = boost::property_tree;

namespace {

[[noreturn]] void config_fail(const std::string& what) { fail(ErrorCode::ConfigError, what); }

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& raw, const std::string& key) {
  const std::string s = trim(raw);
  double v = 0.0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) config_fail(key + ": not a number: '" + raw + "'");
  return v;
}

long to_long(const std::string& raw, const std::string& key) {
  const std::string s = trim(raw);
  long v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) config_fail(key + ": not an integer: '" + raw + "'");
  return v;
}

bool to_bool(const std::string& raw, const std::string& key) {
  const std::string s = trim(raw);
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  config_fail(key + ": not a boolean: '" + raw + "'");
}

std::string join(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + shortest(v[i]);
  return out;
}

const std::set<std::string> kKnown = {
    "curve.kind",         "curve.radius",      "curve.a",          "curve.b",
    "curve.r0",           "curve.cos",         "curve.sin",        "curve.normalize",
    "run.epsilon",        "run.output",        "run.seed",         "gap.N",
    "gap.lambda",         "gap.delta",         "branches.l",       "branches.k",
    "branches.step",      "grid.poisson_h",    "grid.h_factor",    "window.policy",
    "window.M",           "solve2d.count",     "solve2d.target",   "solve2d.inner_tolerance",
    "solve2d.residual_tolerance", "radial.m",  "radial.levels",    "radial.field",
    "radial.cells"};

}  // namespace

std::string shortest(double value) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) config_fail("cannot format number");
  return std::string(buf, p);
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(to_double(item, "list"));
  }
  return out;
}

IntRange parse_int_range(const std::string& text) {
  const auto pos = text.find("..");
  if (pos == std::string::npos) {
    const long v = to_long(text, "range");
    return {int(v), int(v)};
  }
  return {int(to_long(text.substr(0, pos), "range")), int(to_long(text.substr(pos + 2), "range"))};
}

std::pair<double, double> parse_real_range(const std::string& text) {
  const auto pos = text.find("..");
  if (pos == std::string::npos) config_fail("expected a range lo..hi: '" + text + "'");
  return {to_double(text.substr(0, pos), "range"), to_double(text.substr(pos + 2), "range")};
}

CurveDescriptor CurveBlock::descriptor() const {
  if (kind == "disk") return CurveDescriptor::disk(radius, normalize);
  if (kind == "ellipse") return CurveDescriptor::ellipse(a, b, normalize);
  if (kind == "star") return CurveDescriptor::fourier_star(r0, cos_coeffs, sin_coeffs, normalize);
  config_fail("curve.kind must be disk, ellipse or star");
}

double ExperimentConfig::window_factor(double epsilon) const {
  if (window_policy == "constant") return window_M;
  return std::min(1.0 / std::sqrt(epsilon), 0.25 / epsilon);
}

void ExperimentConfig::validate() const {
  if (curve.kind != "disk" && curve.kind != "ellipse" && curve.kind != "star")
    config_fail("curve.kind must be disk, ellipse or star");
  if (!(curve.radius > 0 && curve.a > 0 && curve.b > 0 && curve.r0 > 0)) config_fail("curve lengths must be positive");
  if (epsilons.empty()) config_fail("run.epsilon is empty");
  for (double e : epsilons)
    if (!(e > 0 && e < 0.5)) config_fail("every epsilon must lie in (0, 0.5), got " + shortest(e));
  if (output.empty()) config_fail("run.output is empty");
  try {
    gap().validate();
  } catch (const Error& e) {
    config_fail(std::string("gap: ") + e.what());
  }
  if (branch_l.lo < 1 || branch_l.hi < branch_l.lo) config_fail("branches.l must be lo..hi with 1 <= lo <= hi");
  if (!(k_min < k_max)) config_fail("branches.k must have lo < hi");
  if (!(k_step > 0)) config_fail("branches.step must be positive");
  if (!(poisson_h >= 0)) config_fail("grid.poisson_h must be >= 0");
  if (!(h_factor > 0)) config_fail("grid.h_factor must be positive");
  if (window_policy != "inv_sqrt" && window_policy != "constant")
    config_fail("window.policy must be inv_sqrt or constant");
  if (!(window_M >= 1)) config_fail("window.M must be >= 1");
  if (count < 1) config_fail("solve2d.count must be >= 1");
  if (!(target >= 0)) config_fail("solve2d.target must be >= 0");
  if (!(inner_tolerance > 0 && residual_tolerance > 0)) config_fail("solve2d tolerances must be positive");
  if (radial_m && radial_m->hi < radial_m->lo) config_fail("radial.m must be lo..hi");
  if (radial_levels < 1) config_fail("radial.levels must be >= 1");
  if (radial_cells < 0) config_fail("radial.cells must be >= 0");
}

ExperimentConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    config_fail(std::string("malformed config: ") + e.what());
  }
  for (const auto& [section, body] : tree) {
    if (!body.data().empty()) config_fail("key outside a section: " + section);
    for (const auto& [key, value] : body)
      if (!kKnown.count(section + "." + key)) config_fail("unknown key " + section + "." + key);
  }
  ExperimentConfig c;
  auto get = [&](const std::string& path) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(path, '.'))) return trim(*v);
    return std::nullopt;
  };
  if (auto v = get("curve.kind")) c.curve.kind = *v;
  if (auto v = get("curve.radius")) c.curve.radius = to_double(*v, "curve.radius");
  if (auto v = get("curve.a")) c.curve.a = to_double(*v, "curve.a");
  if (auto v = get("curve.b")) c.curve.b = to_double(*v, "curve.b");
  if (auto v = get("curve.r0")) c.curve.r0 = to_double(*v, "curve.r0");
  if (auto v = get("curve.cos")) c.curve.cos_coeffs = parse_list(*v);
  if (auto v = get("curve.sin")) c.curve.sin_coeffs = parse_list(*v);
  if (auto v = get("curve.normalize")) c.curve.normalize = to_bool(*v, "curve.normalize");
  if (auto v = get("run.epsilon")) c.epsilons = parse_list(*v);
  if (auto v = get("run.output")) c.output = *v;
  if (auto v = get("run.seed")) {
    const long s = to_long(*v, "run.seed");
    if (s < 0) config_fail("run.seed must be >= 0");
    c.seed = static_cast<unsigned long>(s);
  }
  if (auto v = get("gap.N")) c.gap_N = int(to_long(*v, "gap.N"));
  if (auto v = get("gap.lambda")) c.gap_lambda = to_double(*v, "gap.lambda");
  if (auto v = get("gap.delta")) c.gap_delta = to_double(*v, "gap.delta");
  if (auto v = get("branches.l")) c.branch_l = parse_int_range(*v);
  if (auto v = get("branches.k")) std::tie(c.k_min, c.k_max) = parse_real_range(*v);
  if (auto v = get("branches.step")) c.k_step = to_double(*v, "branches.step");
  if (auto v = get("grid.poisson_h")) c.poisson_h = to_double(*v, "grid.poisson_h");
  if (auto v = get("grid.h_factor")) c.h_factor = to_double(*v, "grid.h_factor");
  if (auto v = get("window.policy")) c.window_policy = *v;
  if (auto v = get("window.M")) c.window_M = to_double(*v, "window.M");
  if (auto v = get("solve2d.count")) c.count = int(to_long(*v, "solve2d.count"));
  if (auto v = get("solve2d.target")) c.target = to_double(*v, "solve2d.target");
  if (auto v = get("solve2d.inner_tolerance")) c.inner_tolerance = to_double(*v, "solve2d.inner_tolerance");
  if (auto v = get("solve2d.residual_tolerance")) c.residual_tolerance = to_double(*v, "solve2d.residual_tolerance");
  if (auto v = get("radial.m")) {
    if (*v != "auto") c.radial_m = parse_int_range(*v);
  }
  if (auto v = get("radial.levels")) c.radial_levels = int(to_long(*v, "radial.levels"));
  if (auto v = get("radial.field")) c.radial_field = to_bool(*v, "radial.field");
  if (auto v = get("radial.cells")) c.radial_cells = int(to_long(*v, "radial.cells"));
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open config " + path);
  return parse_config(in);
}

void write_config(std::ostream& out, const ExperimentConfig& c) {
  auto range = [](const IntRange& r) { return std::to_string(r.lo) + ".." + std::to_string(r.hi); };
  out << "[curve]\n"
      << "kind = " << c.curve.kind << "\n"
      << "radius = " << shortest(c.curve.radius) << "\n"
      << "a = " << shortest(c.curve.a) << "\n"
      << "b = " << shortest(c.curve.b) << "\n"
      << "r0 = " << shortest(c.curve.r0) << "\n"
      << "cos = " << join(c.curve.cos_coeffs) << "\n"
      << "sin = " << join(c.curve.sin_coeffs) << "\n"
      << "normalize = " << (c.curve.normalize ? "true" : "false") << "\n\n"
      << "[run]\n"
      << "epsilon = " << join(c.epsilons) << "\n"
      << "output = " << c.output << "\n"
      << "seed = " << c.seed << "\n\n"
      << "[gap]\n"
      << "N = " << c.gap_N << "\n"
      << "lambda = " << shortest(c.gap_lambda) << "\n"
      << "delta = " << shortest(c.gap_delta) << "\n\n"
      << "[branches]\n"
      << "l = " << range(c.branch_l) << "\n"
      << "k = " << shortest(c.k_min) << ".." << shortest(c.k_max) << "\n"
      << "step = " << shortest(c.k_step) << "\n\n"
      << "[grid]\n"
      << "poisson_h = " << shortest(c.poisson_h) << "\n"
      << "h_factor = " << shortest(c.h_factor) << "\n\n"
      << "[window]\n"
      << "policy = " << c.window_policy << "\n"
      << "M = " << shortest(c.window_M) << "\n\n"
      << "[solve2d]\n"
      << "count = " << c.count << "\n"
      << "target = " << shortest(c.target) << "\n"
      << "inner_tolerance = " << shortest(c.inner_tolerance) << "\n"
      << "residual_tolerance = " << shortest(c.residual_tolerance) << "\n\n"
      << "[radial]\n"
      << "m = " << (c.radial_m ? range(*c.radial_m) : std::string("auto")) << "\n"
      << "levels = " << c.radial_levels << "\n"
      << "field = " << (c.radial_field ? "true" : "false") << "\n"
      << "cells = " << c.radial_cells << "\n";
}

std::string config_text(const ExperimentConfig& config) {
  std::ostringstream os;
  write_config(os, config);
  return os.str();
}

}  // namespace edgestates::cli
