#pragma once

#include <cstddef>
#include <string>

#include "cpdshift/measure.hpp"
#include "cpdshift/moments.hpp"
#include "cpdshift/tolerance.hpp"

namespace cpd {

/// Per-vector compression (b, c, F) of the representing triplet:
/// gamma_n = 1 + n b + n^2 c + sum_i Q_n(x_i) f_i, with F free of an atom at 1.
struct ScalarTriplet {
  double b = 0.0;
  double c = 0.0;
  AtomicMeasure F;
};

/// Validating constructor: c >= -eps_eq (clamped to zero) and no atom of F
/// within eps_node of 1.
ScalarTriplet make_triplet(double b, double c, AtomicMeasure F, const ToleranceConfig& tol = {});

struct SubnormalityCertificate {
  /// Integral of 1/(x-1)^2 against F; must not exceed gamma_0 = 1.
  double mass_integral = 0.0;
  bool mass_ok = false;
  double b_integral = 0.0;
  /// |b - integral of 1/(x-1) against F|.
  double b_residual = 0.0;
  bool b_ok = false;
  double c_value = 0.0;
  bool c_ok = false;
  bool passed = false;
  /// "a", "b" or "c" for the first failing condition; empty when passed.
  std::string first_failure;
};

/// Splits the measure of the second differences into its atom at 1 (2c) and
/// the rest (F). Needs gamma_0 = 1 and N >= 5.
ScalarTriplet recover_triplet(const MomentSequence& seq, const ToleranceConfig& tol = {});

MomentSequence reconstruct_moments(const ScalarTriplet& t, std::size_t order, const ToleranceConfig& tol = {});

SubnormalityCertificate subnormality_certificate(const ScalarTriplet& t, const ToleranceConfig& tol = {});

/// F / (x-1)^2 plus the defect 1 - integral placed at 1. Throws
/// CertificateFailed unless the certificate passes.
AtomicMeasure berger_measure(const ScalarTriplet& t, const ToleranceConfig& tol = {});

/// Certificate passes and the Berger measure is a single point mass.
bool shift_quasinormal_certificate(const ScalarTriplet& t, const ToleranceConfig& tol = {});

/// Measure of the second differences of the n-th power orbit:
/// push (1 + x + ... + x^{n-1})^2 (F + 2c delta_1) forward by x -> x^n.
AtomicMeasure power_transform(const ScalarTriplet& t, std::size_t n, const ToleranceConfig& tol = {});

/// |b_n - integral of (x^n - 1)/(x - 1)^2 against F|, with b_n recovered from
/// the stride-n subsequence of the reconstructed moments. `order` is the
/// length of that subsequence; zero picks one from the size of F.
double b_n_identity_check(const ScalarTriplet& t, std::size_t n, const ToleranceConfig& tol = {},
                          std::size_t order = 0);

}  // namespace cpd
