// Acceptance suite: one PASS/FAIL line per criterion.
//   edgestates_acceptance [--criterion N] [--quick]
#include <cstring>
#include <iostream>
#include <string>

#include "edgestates_acceptance/acceptance.hpp"

int main(int argc, char** argv) {
  using namespace edgestates::acceptance;
  int only = 0;
  Profile profile = Profile::Desk;
  for (int i = 1; i < argc; ++i) {
    if (!std::strcmp(argv[i], "--criterion") && i + 1 < argc) {
      only = std::stoi(argv[++i]);
    } else if (!std::strcmp(argv[i], "--quick")) {
      profile = Profile::Quick;
    } else {
      std::cerr << "usage: " << argv[0] << " [--criterion N] [--quick]\n";
      return 2;
    }
  }
  auto ctx = make_context(profile);
  bool ok = true;
  if (only) {
    const CriterionResult r = run_criterion(only, *ctx);
    std::cout << format_line(r) << std::endl;
    ok = r.passed;
  } else {
    for (const auto& r : run_all(*ctx, &std::cout)) ok = ok && r.passed;
  }
  return ok ? 0 : 1;
}
