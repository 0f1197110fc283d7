#pragma once

#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

namespace edgestates::acceptance {

enum class Profile { Desk, Quick };

struct CriterionResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string measured;  // human-readable measured values and tolerances
  std::vector<std::pair<std::string, double>> values;
  double seconds = 0.0;
};

class Context;

// Shared caches (dispersion branch, gauge solutions) across criteria.
std::shared_ptr<Context> make_context(Profile profile);

constexpr int kCriterionCount = 10;
CriterionResult run_criterion(int id, Context& context);
std::vector<CriterionResult> run_all(Context& context, std::ostream* progress = nullptr);

// One line: "PASS  C<id>  <name>  <measured>  (<seconds> s)".
std::string format_line(const CriterionResult& result);
void write_summary_json(std::ostream& out, const std::vector<CriterionResult>& results);

}  // namespace edgestates::acceptance
