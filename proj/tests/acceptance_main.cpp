#include <cstdio>

#include "cpdshift/acceptance.hpp"

int main() {
  const auto results = cpd::run_acceptance();
  int failed = 0;
  for (const auto& r : results) {
    std::printf("criterion %2d %s: %s (%.3f s) %s\n", r.id, r.passed ? "PASS" : "FAIL", r.title.c_str(), r.seconds,
                r.detail.c_str());
    if (!r.passed) ++failed;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failed, results.size());
  return failed == 0 ? 0 : 1;
}
