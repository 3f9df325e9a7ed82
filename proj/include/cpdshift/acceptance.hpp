#pragma once

#include <string>
#include <vector>

#include "cpdshift/tolerance.hpp"

namespace cpd {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// Runs the ten end-to-end acceptance checks in order.
std::vector<CriterionResult> run_acceptance(const ToleranceConfig& tol = {});

}  // namespace cpd
