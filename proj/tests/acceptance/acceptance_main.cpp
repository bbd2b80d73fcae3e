// Runs every acceptance criterion once and prints one line per criterion.
// Exit status is non-zero if any criterion fails.

#include <cstdio>
#include <iostream>

#include "tsneflow_checks/suite.hpp"

int main() {
  tsneflow::checks::SuiteOptions opts;
  std::size_t index = 0, failed = 0;
  tsneflow::checks::run_suite(opts, [&](const tsneflow::checks::CheckResult& r) {
    ++index;
    if (!r.passed) ++failed;
    std::cout << "[" << index << "/12] " << tsneflow::checks::format_result(r) << std::endl;
  });
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
            << std::endl;
  return failed == 0 ? 0 : 1;
}
