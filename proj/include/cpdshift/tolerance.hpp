#pragma once

#include "cpdshift/errors.hpp"

namespace cpd {

/// Numerical thresholds shared by every positivity test and recovery routine.
struct ToleranceConfig {
  /// Eigenvalues of a Hankel section below -eps_psd * scale count as negative.
  double eps_psd = 1e-8;
  /// Relative equality threshold for structural checks and residuals.
  double eps_eq = 1e-7;
  /// Absolute radius within which two nodes on R+ are the same point.
  double eps_node = 1e-9;
  /// Half-width around x = 1 inside which Q_n is evaluated by its sum form.
  double singular_band = 1e-4;

  void validate() const {
    auto check = [](double v, const char* name) {
      if (!(v > 0.0 && v < 1.0))
        throw Error(ErrorCode::InvalidArgument, std::string(name) + " must lie in (0, 1)");
    };
    check(eps_psd, "eps_psd");
    check(eps_eq, "eps_eq");
    check(eps_node, "eps_node");
    check(singular_band, "singular_band");
  }
};

}  // namespace cpd
