#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "edgestates/dispersion.hpp"
#include "edgestates/error.hpp"
#include "edgestates/oscillator.hpp"

using namespace edgestates;

namespace {
const DispersionBranch& branch(int l) {
  static const DispersionBranch b1 = build_branch(1, -10.0, 4.0, 0.05);
  static const DispersionBranch b2 = build_branch(2, -10.0, 4.0, 0.05);
  return l == 1 ? b1 : b2;
}
const double kSqrtPi = std::sqrt(std::numbers::pi);
}  // namespace

TEST_CASE("tabulated branches") {
  const auto& b1 = branch(1);
  CHECK(b1.k.size() == 281);
  CHECK(std::abs(b1.nu_at(0.0) - 3.0) < 1e-6);
  CHECK(std::abs(b1.nu.front() - 1.0) < 1e-8);
  CHECK(b1.max_midpoint_error < 1e-6);
  CHECK(std::abs(b1.nu_at(0.025) - extrapolated_eigenvalue(1, 0.025)) < 1e-6);
  const auto& b2 = branch(2);
  CHECK(std::abs(b2.nu_at(0.0) - 7.0) < 1e-6);
  CHECK(std::abs(b2.nu.front() - 3.0) < 1e-4);
  // The flat end has no meaningful B.
  CHECK(std::isnan(b1.B.front()));
  CHECK(std::isfinite(b1.B_at(0.0)));
}

TEST_CASE("wavenumber roots") {
  CHECK(std::abs(solve_wavenumber(branch(1), 3.0)) < 1e-6);
  const double k = solve_wavenumber(branch(1), 2.0);
  CHECK(k < 0.0);
  CHECK(std::abs(extrapolated_eigenvalue(1, k) - 2.0) < 1e-8);
  try {
    solve_wavenumber(branch(2), 2.5);
    FAIL("expected BelowBranch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BelowBranch);
  }
}

TEST_CASE("one root per admissible branch, positive group velocity") {
  for (double lambda : {3.4, 4.0, 4.6}) {
    int roots = 0;
    for (int l = 1; l <= 2; ++l) {
      const double k = solve_wavenumber(branch(l), lambda);
      CHECK(branch_point(l, k).nu_prime > 0.0);
      ++roots;
    }
    CHECK(roots == 2);
  }
}

TEST_CASE("boundary coefficient") {
  CHECK(std::abs(coefficient_B(1, 0.0) + 1.0) < 1e-4);
  CHECK(coefficient_B(1, 1.0) < 0.0);
  CHECK(std::abs(coefficient_B(1, -4.0)) > std::abs(coefficient_B(1, 0.0)));
}

TEST_CASE("two-term predictions") {
  SUBCASE("q = 0 composition") {
    const auto p = predict_at(1, 0, 0.05);
    const double expected = 3.0 / 0.0025 + 2 * std::numbers::pi * (4.0 / kSqrtPi) * (-1.0) / 0.05;
    CHECK(std::abs(p.lambda_pred - expected) < 1e-3);
    CHECK(std::abs(p.lambda_pred - 916.38) < 0.05);
  }
  SUBCASE("quantized q inside the window") {
    const auto preds = predict_eigenvalues({branch(1)}, GapWindow{}, 0.05);
    bool has_zero = false;
    for (const auto& p : preds) {
      const double n = p.q / (2 * std::numbers::pi * 0.05);
      CHECK(std::abs(n - std::round(n)) < 1e-12);
      CHECK(p.nu >= 1.0 - 1e-9);
      CHECK(p.nu <= 3.0 + 1e-9);
      has_zero = has_zero || p.n == 0;
    }
    CHECK(has_zero);
  }
  SUBCASE("eps = 0.1 one quantum up") {
    const auto p = predict_at(1, 1, 0.1);
    CHECK(std::isfinite(p.lambda_pred));
    CHECK(std::abs(0.01 * p.lambda_pred - p.nu) < 2 * std::numbers::pi * 0.1 * std::abs(p.nu_prime * p.B) + 1e-12);
  }
  SUBCASE("increasing in q") {
    const double a = predict_at(1, -1, 0.05).lambda_pred, b = predict_at(1, 0, 0.05).lambda_pred,
                 c = predict_at(1, 1, 0.05).lambda_pred;
    CHECK(a < b);
    CHECK(b < c);
  }
  SUBCASE("linear approach at fixed q") {
    std::vector<double> e = {0.1, 0.05, 0.025}, r;
    for (double eps : e) {
      const auto p = predict_at(1, 0, eps);
      r.push_back(eps * eps * p.lambda_pred - p.nu);
    }
    const double slope = (r[0] - r[2]) / (e[0] - e[2]);
    CHECK(std::abs(slope + 2 * std::numbers::pi * 4.0 / kSqrtPi) < 1e-3);
  }
  SUBCASE("empty window") {
    CHECK_THROWS_AS(predict_eigenvalues({branch(1)}, GapWindow{1, 2.0, 0.2}, 0.05, std::make_pair(40.0, 41.0)), Error);
  }
}

TEST_CASE("gap window validation") {
  CHECK_NOTHROW((GapWindow{1, 2.0, 0.2}.validate()));
  CHECK_THROWS_AS((GapWindow{1, 1.1, 0.2}.validate()), Error);
  CHECK_THROWS_AS((GapWindow{0, 2.0, 0.2}.validate()), Error);
}

TEST_CASE("branch CSV layout") {
  std::ostringstream os;
  write_branch_csv(os, {branch(1)});
  std::istringstream is(os.str());
  std::string header, first;
  std::getline(is, header);
  std::getline(is, first);
  CHECK(header == "l,k,nu,nu_prime,B");
  CHECK(first.rfind("1,-10,1.0000000000", 0) == 0);
}
