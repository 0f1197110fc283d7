#include "edgestates_cli/app.hpp"

#include <openssl/evp.h>
#include <openssl/opensslv.h>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <boost/version.hpp>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <numbers>
#include <optional>
#include <sstream>

#include "edgestates/dispersion.hpp"
#include "edgestates/edgestate.hpp"
#include "edgestates/error.hpp"
#include "edgestates/field.hpp"
#include "edgestates/geometry.hpp"
#include "edgestates/io.hpp"
#include "edgestates/parallel.hpp"
#include "edgestates/spectra2d.hpp"
#include "edgestates_acceptance/acceptance.hpp"
#include "edgestates_cli/config.hpp"
#include "json.hpp"

#ifndef EDGESTATES_VERSION
#define EDGESTATES_VERSION "0.0.0"
#endif

namespace edgestates::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorCode::IoError, "sha256 failed");
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

namespace {

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

class Run {
 public:
  Run(ExperimentConfig config, std::string subcommand, std::ostream& out)
      : config_(std::move(config)), subcommand_(std::move(subcommand)), out_(out), started_(utc_now()) {}

  const ExperimentConfig& config() const { return config_; }
  std::ostream& out() { return out_; }

  fs::path dir() const { return config_.output; }

  void prepare() {
    std::error_code ec;
    fs::create_directories(dir(), ec);
    if (ec || !fs::is_directory(dir())) fail(ErrorCode::IoError, "cannot create output directory " + config_.output);
  }

  // Opens an output file and records it in the manifest.
  void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
    const fs::path p = dir() / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) fail(ErrorCode::IoError, "cannot write " + p.string());
    body(f);
    f.close();
    if (!f) fail(ErrorCode::IoError, "write failed for " + p.string());
    outputs_.push_back(name);
  }

  template <class F>
  auto timed(const std::string& label, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      timings_.emplace_back(label, seconds_since(t0));
    } else {
      auto r = f();
      timings_.emplace_back(label, seconds_since(t0));
      return r;
    }
  }

  void write_manifest(const std::string& status, const json* error = nullptr) {
    const std::string text = config_text(config_);
    json m;
    m["tool"] = "edgestates";
    m["subcommand"] = subcommand_;
    m["status"] = status;
    m["config_sha256"] = sha256_hex(text);
    m["config"] = text;
    m["seed"] = config_.seed;
    m["threads"] = worker_count();
    json v;
    v["edgestates"] = EDGESTATES_VERSION;
    v["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                 std::to_string(EIGEN_MINOR_VERSION);
    v["boost"] = std::to_string(BOOST_VERSION / 100000) + "." + std::to_string(BOOST_VERSION / 100 % 1000) + "." +
                 std::to_string(BOOST_VERSION % 100);
    v["openssl"] = OPENSSL_VERSION_TEXT;
    v["compiler"] = __VERSION__;
    m["versions"] = v;
    m["started_at"] = started_;
    m["finished_at"] = utc_now();
    json t = json::object();
    for (const auto& [k, s] : timings_) t[k] = s;
    m["timings_seconds"] = t;
    m["outputs"] = outputs_;
    if (error) m["error"] = *error;
    std::ofstream f(dir() / "manifest.json");
    f << m.dump(2) << "\n";
  }

 private:
  static double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }

  ExperimentConfig config_;
  std::string subcommand_;
  std::ostream& out_;
  std::string started_;
  std::vector<std::string> outputs_;
  std::vector<std::pair<std::string, double>> timings_;
};

std::string tag(double eps) { return shortest(eps); }

std::vector<DispersionBranch> branches_up_to(Run& run, int l_max) {
  const auto& c = run.config();
  std::vector<DispersionBranch> out;
  for (int l = 1; l <= l_max; ++l)
    out.push_back(run.timed("branch_l" + std::to_string(l), [&] { return build_branch(l, c.k_min, c.k_max, c.k_step); }));
  return out;
}

void cmd_branches(Run& run) {
  const auto& c = run.config();
  std::vector<DispersionBranch> branches;
  for (int l = c.branch_l.lo; l <= c.branch_l.hi; ++l)
    branches.push_back(
        run.timed("branch_l" + std::to_string(l), [&] { return build_branch(l, c.k_min, c.k_max, c.k_step); }));
  run.write("branches.csv", [&](std::ostream& o) { write_branch_csv(o, branches); });
  run.out() << "branches.csv: " << branches.size() << " branch(es), " << branches.front().k.size() << " k each\n";
}

std::vector<EigenvaluePrediction> predictions_for(Run& run, const std::vector<DispersionBranch>& branches, double eps) {
  return run.timed("predict_" + tag(eps), [&] { return predict_eigenvalues(branches, run.config().gap(), eps); });
}

void cmd_predict(Run& run) {
  const auto& c = run.config();
  const auto branches = branches_up_to(run, c.gap_N);
  json doc;
  doc["gap"] = {{"N", c.gap_N}, {"lambda", c.gap_lambda}, {"delta", c.gap_delta}};
  json runs = json::array();
  for (double eps : c.epsilons) {
    const auto preds = predictions_for(run, branches, eps);
    std::ostringstream os;
    write_predictions_json(os, preds);
    runs.push_back({{"epsilon", eps}, {"predictions", json::parse(os.str())}});
    run.out() << "epsilon " << tag(eps) << ": " << preds.size() << " predictions\n";
  }
  doc["runs"] = runs;
  run.write("predictions.json", [&](std::ostream& o) { o << doc.dump(2) << "\n"; });
}

BoundaryCurve build_curve(const ExperimentConfig& c) { return BoundaryCurve::build(c.curve.descriptor()); }

void cmd_disk_oracle(Run& run) {
  const auto& c = run.config();
  if (c.curve.kind != "disk") fail(ErrorCode::InvalidArgument, "disk-oracle needs curve.kind = disk");
  const BoundaryCurve curve = build_curve(c);
  const double R = curve.perimeter() / (2 * std::numbers::pi);
  const double area = curve.area();
  for (double eps : c.epsilons) {
    IntRange m{0, 0};
    if (c.radial_m) {
      m = *c.radial_m;
    } else {
      const double F = area / (2 * std::numbers::pi * eps * eps);
      m = {-static_cast<int>(std::ceil(F)) - 8, 2};
    }
    RadialOptions opts;
    opts.cells = static_cast<std::size_t>(c.radial_cells);
    const SpectralResult res = run.timed("radial_" + tag(eps), [&] {
      return disk_radial_oracle(R, eps, m.lo, m.hi, static_cast<std::size_t>(c.radial_levels), c.radial_field, opts);
    });
    run.write("disk_oracle_" + tag(eps) + ".json", [&](std::ostream& o) { write_spectral_json(o, res); });
    run.out() << "epsilon " << tag(eps) << ": " << res.eigenvalues.size() << " radial eigenvalues, m in " << m.lo
              << ".." << m.hi << "\n";
  }
}

struct Solved {
  MagneticOperator2D op;
  SpectralResult result;
  double sigma = 0.0;
};

Solved solve_2d(Run& run, const BoundaryCurve& curve, const GaugeData& gauge,
                const std::vector<DispersionBranch>& branches, double eps, int count) {
  const auto& c = run.config();
  Solved s;
  if (c.target > 0) {
    s.sigma = c.target / (eps * eps);
  } else {
    const auto preds = predictions_for(run, branches, eps);
    const EigenvaluePrediction* best = &preds.front();
    for (const auto& p : preds)
      if (std::abs(p.nu - c.gap_lambda) < std::abs(best->nu - c.gap_lambda)) best = &p;
    s.sigma = best->lambda_pred;
  }
  s.op = run.timed("assemble_" + tag(eps), [&] { return MagneticOperator2D::assemble(curve, gauge, eps, eps / c.h_factor); });
  EigensolveOptions opts;
  opts.inner_tolerance = c.inner_tolerance;
  opts.residual_tolerance = c.residual_tolerance;
  opts.seed = c.seed;
  s.result = run.timed("eigensolve_" + tag(eps),
                       [&] { return eigensolve_near(s.op, s.sigma, static_cast<std::size_t>(count), opts); });
  return s;
}

void cmd_solve2d(Run& run) {
  const auto& c = run.config();
  const BoundaryCurve curve = build_curve(c);
  PoissonOptions popts;
  popts.h = c.poisson_h;
  const GaugeData gauge = run.timed("poisson", [&] { return GaugeData::solve(curve, popts); });
  std::vector<DispersionBranch> branches;
  if (c.target <= 0) branches = branches_up_to(run, c.gap_N);
  for (double eps : c.epsilons) {
    const Solved s = solve_2d(run, curve, gauge, branches, eps, c.count);
    run.write("spectrum_" + tag(eps) + ".json", [&](std::ostream& o) { write_spectral_json(o, s.result); });
    const DomainGrid& grid = s.op.grid();
    for (std::size_t j = 0; j < s.result.eigenvectors.size(); ++j) {
      const auto& v = s.result.eigenvectors[j];
      run.write("eigenvector_" + tag(eps) + "_" + std::to_string(j) + ".csv", [&](std::ostream& o) {
        CsvWriter csv(o, {"x", "y", "re", "im"});
        const auto& nodes = grid.inside_nodes();
        for (std::size_t u = 0; u < nodes.size(); ++u) {
          const Vec2 p = grid.position(nodes[u]);
          csv.row({p.x, p.y, v[u].real(), v[u].imag()});
        }
      });
    }
    run.out() << "epsilon " << tag(eps) << ": sigma " << format_number(s.sigma) << ", " << s.result.eigenvalues.size()
              << " eigenpairs on " << s.op.size() << " unknowns\n";
  }
}

void cmd_edgestate(Run& run) {
  const auto& c = run.config();
  const BoundaryCurve curve = build_curve(c);
  PoissonOptions popts;
  popts.h = c.poisson_h;
  const auto gauge =
      std::make_shared<const GaugeData>(run.timed("poisson", [&] { return GaugeData::solve(curve, popts); }));
  const auto branches = branches_up_to(run, c.gap_N);
  for (double eps : c.epsilons) {
    const Solved s = solve_2d(run, curve, *gauge, branches, eps, 3);
    std::size_t pick = 0;
    for (std::size_t i = 1; i < s.result.eigenvalues.size(); ++i)
      if (std::abs(s.result.eigenvalues[i] - s.sigma) < std::abs(s.result.eigenvalues[pick] - s.sigma)) pick = i;
    const auto& psi = s.result.eigenvectors[pick];
    std::vector<EdgeComponent> comps;
    for (int l = 1; l <= c.gap_N; ++l) comps.push_back({l, cplx(1.0 / std::sqrt(double(c.gap_N)), 0.0), 0.0});
    const double scaled = s.result.eigenvalues[pick] * eps * eps;
    const EdgeStateModel model = EdgeStateModel::at_energy(gauge, eps, scaled, branches, comps);
    const double M = c.window_factor(eps);
    const ComparisonReport rep = run.timed("compare_" + tag(eps), [&] { return compare(psi, s.op.grid(), model, M); });
    run.write("edgestate_" + tag(eps) + ".json", [&](std::ostream& o) { write_report_json(o, rep); });
    run.write("profile_" + tag(eps) + ".csv", [&](std::ostream& o) {
      write_profile_csv(o, boundary_mass_profile(psi, s.op.grid(), *gauge, eps, M));
    });
    run.out() << "epsilon " << tag(eps) << ": eigenvalue " << format_number(s.result.eigenvalues[pick]) << ", overlap "
              << format_number(rep.overlap) << "\n";
  }
}

int cmd_verify(Run& run, const std::string& profile, bool strict) {
  const auto ctx =
      acceptance::make_context(profile == "quick" ? acceptance::Profile::Quick : acceptance::Profile::Desk);
  const auto results = run.timed("acceptance", [&] { return acceptance::run_all(*ctx, &run.out()); });
  run.write("verify_summary.json", [&](std::ostream& o) { acceptance::write_summary_json(o, results); });
  std::size_t passed = 0;
  for (const auto& r : results) passed += r.passed;
  run.out() << passed << "/" << results.size() << " criteria passed\n";
  return strict && passed != results.size() ? 1 : 0;
}

json error_json(ErrorCode code, const std::string& message) {
  return {{"error", std::string(to_string(code))}, {"message", message}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Magnetic Laplacian edge states on planar domains", "edgestates"};
  app.require_subcommand(1);
  app.set_version_flag("--version", EDGESTATES_VERSION);

  std::optional<std::string> config_path, out_dir, epsilon, l_range, k_range, m_range, profile_opt;
  std::optional<double> step, lambda, delta, target, h_factor, window_M;
  std::optional<int> gap, count, levels;
  std::optional<unsigned long> seed;
  bool no_field = false, strict = false;

  app.add_option("-c,--config", config_path, "experiment config (INI)")->check(CLI::ExistingFile);
  app.add_option("-o,--out", out_dir, "output directory");
  app.add_option("--seed", seed, "random seed");

  auto eps_opt = [&](CLI::App* s) { s->add_option("--epsilon", epsilon, "comma-separated epsilon list"); };
  auto gap_opts = [&](CLI::App* s) {
    s->add_option("--gap", gap, "gap index N");
    s->add_option("--lambda", lambda, "target energy inside the gap");
    s->add_option("--delta", delta, "distance from the Landau levels");
  };

  auto* branches = app.add_subcommand("branches", "tabulate dispersion branches");
  branches->add_option("--l", l_range, "branch indices lo..hi");
  branches->add_option("--k", k_range, "wavenumber range lo..hi");
  branches->add_option("--step", step, "wavenumber step");

  auto* predict = app.add_subcommand("predict", "two-term eigenvalue predictions in a gap");
  eps_opt(predict);
  gap_opts(predict);

  auto* oracle = app.add_subcommand("disk-oracle", "radial eigenvalues on the disk");
  eps_opt(oracle);
  oracle->add_option("--m", m_range, "angular momenta lo..hi");
  oracle->add_option("--levels", levels, "radial levels per m");
  oracle->add_flag("--no-field", no_field, "switch the magnetic field off");

  auto* solve2d = app.add_subcommand("solve2d", "eigenpairs of the discrete operator near a prediction");
  eps_opt(solve2d);
  gap_opts(solve2d);
  solve2d->add_option("--count", count, "number of eigenpairs");
  solve2d->add_option("--target", target, "scaled shift eps^2 sigma (overrides the prediction)");
  solve2d->add_option("--h-factor", h_factor, "grid spacing eps / factor");

  auto* edge = app.add_subcommand("edgestate", "compare an eigenvector with the edge-state ansatz");
  eps_opt(edge);
  gap_opts(edge);
  edge->add_option("--h-factor", h_factor, "grid spacing eps / factor");
  edge->add_option("--M", window_M, "constant window factor");

  auto* verify = app.add_subcommand("verify", "run the acceptance suite");
  verify->add_option("--profile", profile_opt, "desk or quick")->check(CLI::IsMember({"desk", "quick"}));
  verify->add_flag("--strict", strict, "exit 1 when a criterion fails");

  for (auto* s : app.get_subcommands({})) s->fallthrough();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << EDGESTATES_VERSION << "\n";
    return 0;
  } catch (const CLI::ParseError& e) {
    err << error_json(ErrorCode::ConfigError, e.what()).dump() << "\n";
    return 2;
  }
  CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();

  ExperimentConfig config;
  try {
    if (config_path) config = load_config(*config_path);
    if (out_dir) config.output = *out_dir;
    if (seed) config.seed = *seed;
    if (epsilon) config.epsilons = parse_list(*epsilon);
    if (l_range) config.branch_l = parse_int_range(*l_range);
    if (k_range) std::tie(config.k_min, config.k_max) = parse_real_range(*k_range);
    if (step) config.k_step = *step;
    if (gap) {
      config.gap_N = *gap;
      if (!lambda) config.gap_lambda = 2.0 * *gap;
    }
    if (lambda) config.gap_lambda = *lambda;
    if (delta) config.gap_delta = *delta;
    if (m_range) config.radial_m = parse_int_range(*m_range);
    if (levels) config.radial_levels = *levels;
    if (no_field) config.radial_field = false;
    if (count) config.count = *count;
    if (target) config.target = *target;
    if (h_factor) config.h_factor = *h_factor;
    if (window_M) {
      config.window_policy = "constant";
      config.window_M = *window_M;
    }
    config.validate();
  } catch (const Error& e) {
    err << error_json(e.code(), e.what()).dump() << "\n";
    return 2;
  }

  Run runner(config, name, out);
  try {
    runner.prepare();
  } catch (const Error& e) {
    err << error_json(e.code(), e.what()).dump() << "\n";
    return 1;
  }
  try {
    int status = 0;
    if (name == "branches") cmd_branches(runner);
    else if (name == "predict") cmd_predict(runner);
    else if (name == "disk-oracle") cmd_disk_oracle(runner);
    else if (name == "solve2d") cmd_solve2d(runner);
    else if (name == "edgestate") cmd_edgestate(runner);
    else status = cmd_verify(runner, profile_opt.value_or("desk"), strict);
    runner.write_manifest(status == 0 ? "ok" : "failed");
    return status;
  } catch (const Error& e) {
    const json ej = error_json(e.code(), e.what());
    err << ej.dump() << "\n";
    std::ofstream(runner.dir() / "error.json") << ej.dump(2) << "\n";
    runner.write_manifest("error", &ej);
    return 1;
  } catch (const std::exception& e) {
    const json ej = {{"error", "Internal"}, {"message", e.what()}};
    err << ej.dump() << "\n";
    std::ofstream(runner.dir() / "error.json") << ej.dump(2) << "\n";
    runner.write_manifest("error", &ej);
    return 1;
  }
}

}  // namespace edgestates::cli
