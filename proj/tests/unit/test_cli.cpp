#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "edgestates/error.hpp"
#include "edgestates_cli/app.hpp"
#include "edgestates_cli/config.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using namespace edgestates;
using namespace edgestates::cli;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("edgestates_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int invoke(std::vector<std::string> args, std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int rc = run(args, out, err);
  if (err_text) *err_text = err.str();
  return rc;
}

const char* kConfig = R"([curve]
kind = ellipse
a = 0.2
b = 0.1
normalize = true

[run]
epsilon = 0.05, 0.025
seed = 7

[gap]
N = 2
lambda = 4.5
delta = 0.3

[branches]
l = 1..2
k = -4..2
step = 0.1

[window]
policy = constant
M = 6

[radial]
m = -12..-2
levels = 2
)";

}  // namespace

TEST_CASE("config round trip") {
  std::istringstream in(kConfig);
  const ExperimentConfig a = parse_config(in);
  CHECK(a.curve.kind == "ellipse");
  CHECK(a.epsilons == std::vector<double>{0.05, 0.025});
  CHECK(a.branch_l == IntRange{1, 2});
  REQUIRE(a.radial_m.has_value());
  CHECK(a.radial_m->lo == -12);
  CHECK(a.window_factor(0.01) == 6.0);

  std::istringstream again(config_text(a));
  const ExperimentConfig b = parse_config(again);
  CHECK(a == b);
  CHECK(config_text(a) == config_text(b));

  ExperimentConfig d;
  CHECK(std::abs(d.window_factor(0.04) - 5.0) < 1e-12);
  CHECK(std::abs(d.window_factor(0.5) - 0.5) < 1e-12);
}

TEST_CASE("config errors") {
  auto bad = [](const std::string& text) {
    std::istringstream in(text);
    CHECK_THROWS_AS(parse_config(in), Error);
  };
  bad("[curve]\nkind = triangle\n");
  bad("[run]\nepsilon = -0.1\n");
  bad("[run]\nepsilons = 0.1\n");
  bad("[nowhere]\nx = 1\n");
  bad("[gap]\nN = 0\n");
  bad("[branches]\nl = 3..1\n");
  bad("epsilon = 0.1\n");
  CHECK(parse_int_range("-3..4") == IntRange{-3, 4});
  CHECK(parse_int_range("3") == IntRange{3, 3});
  CHECK_THROWS_AS(parse_int_range("a..b"), Error);
  CHECK(parse_list("0.1, 0.05,0.025").size() == 3);
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("branches table and determinism") {
  const fs::path a = scratch("branches_a"), b = scratch("branches_b");
  const std::vector<std::string> args = {"branches", "-o", a.string(), "--l", "1..2", "--k", "-0.5..0.5", "--step", "0.05"};
  REQUIRE(invoke(args) == 0);
  fs::rename(a, b);
  REQUIRE(invoke(args) == 0);
  const std::string csv = slurp(a / "branches.csv");
  CHECK(csv == slurp(b / "branches.csv"));

  std::istringstream lines(csv);
  std::string line;
  std::getline(lines, line);
  CHECK(line == "l,k,nu,nu_prime,B");
  int rows = 0;
  bool found = false;
  while (std::getline(lines, line)) {
    ++rows;
    if (line.rfind("1,0,", 0) == 0) {
      found = true;
      CHECK(line.substr(0, 6) == "1,0,3,");
    }
  }
  CHECK(rows == 42);
  CHECK(found);

  const auto manifest = nlohmann::json::parse(slurp(a / "manifest.json"));
  CHECK(manifest["status"] == "ok");
  CHECK(manifest["subcommand"] == "branches");
  CHECK(manifest["outputs"][0] == "branches.csv");
  CHECK(manifest["config_sha256"].get<std::string>() == sha256_hex(manifest["config"].get<std::string>()));
  CHECK(manifest["config_sha256"] == nlohmann::json::parse(slurp(b / "manifest.json"))["config_sha256"]);
}

TEST_CASE("predict output") {
  const fs::path dir = scratch("predict");
  REQUIRE(invoke({"predict", "-o", dir.string(), "--epsilon", "0.05", "--gap", "1", "--delta", "1e-3"}) == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "predictions.json"));
  const auto& preds = j["runs"][0]["predictions"];
  CHECK(preds.size() == 32);
  bool found = false;
  for (const auto& p : preds) {
    if (p["n"] != 0) continue;
    found = true;
    CHECK(std::abs(p["lambda_pred"].get<double>() - 916.41) < 0.01);
  }
  CHECK(found);
}

TEST_CASE("errors reach the caller") {
  std::string err;
  CHECK(invoke({"predict", "-o", scratch("bad_config").string(), "--epsilon", "0"}, &err) == 2);
  CHECK(nlohmann::json::parse(err)["error"] == "ConfigError");
  CHECK(invoke({"nonsense"}) == 2);
  CHECK(invoke({"predict", "-c", "/nonexistent/config.ini"}) == 2);

  // A branch table too coarse for the spline midpoint check is a module error.
  const fs::path dir = scratch("coarse");
  CHECK(invoke({"branches", "-o", dir.string(), "--k", "-1..1", "--step", "0.5"}, &err) == 1);
  CHECK(nlohmann::json::parse(err)["error"] == "GridTooCoarse");
  CHECK(nlohmann::json::parse(slurp(dir / "error.json"))["error"] == "GridTooCoarse");
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest["status"] == "error");
  CHECK(manifest["error"]["error"] == "GridTooCoarse");
}
