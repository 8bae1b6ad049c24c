// Runs every acceptance criterion at its stated tolerance and prints one
// verdict line per criterion. Exit status 0 only if all pass.

#include <cstdio>
#include <iostream>

#include "kscube/repro.hpp"

int main(int argc, char** argv) {
  kscube::RunConfig cfg;
  if (argc > 1) cfg.seed = std::strtoull(argv[1], nullptr, 10);
  int failed = 0;
  for (const auto& [id, fn] : kscube::repro_criteria()) {
    const auto row = kscube::run_criterion(id, cfg);
    std::printf("criterion %-2s %s  %8.3f s (budget %g s)  %s\n", row.id.c_str(), row.pass ? "PASS" : "FAIL",
                row.runtime_s, row.budget_s, row.claim.c_str());
    if (!row.pass) {
      ++failed;
      std::printf("    detail: %s\n    values: %s\n", row.detail.c_str(), row.values.dump().c_str());
    }
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(kscube::repro_criteria().size()) - failed,
              kscube::repro_criteria().size());
  return failed == 0 ? 0 : 1;
}
