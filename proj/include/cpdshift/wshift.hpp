#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "cpdshift/measure.hpp"
#include "cpdshift/moments.hpp"
#include "cpdshift/tolerance.hpp"

namespace cpd {

/// Weights head[0..kappa-1], then tail forever.
struct EventuallyConstant {
  std::vector<double> head;
  double tail = 1.0;
};

/// Weights lambda_k = sqrt(gamma_{k+1} / gamma_k) with gamma the moments of a
/// probability measure on R+ (the Berger measure of the shift).
struct BergerGenerated {
  AtomicMeasure measure;
};

/// Weights lambda_k = sqrt(p(k+1) / p(k)) for a polynomial p of degree 1 or 2
/// that is positive on the nonnegative integers. Coefficients ascend: c0, c1, c2.
struct PolyThreeIsometry {
  std::vector<double> p;

  double operator()(double x) const {
    double acc = 0.0;
    for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * x + *it;
    return acc;
  }
};

/// Unilateral weighted shift on l^2 given symbolically. Every weight is
/// multiplied by a global positive scale, which keeps all three families
/// closed under T -> alpha T.
class WeightedShift {
 public:
  using Model = std::variant<EventuallyConstant, BergerGenerated, PolyThreeIsometry>;

  static WeightedShift eventually_constant(std::vector<double> head, double tail);
  /// The measure is normalized to total mass one.
  static WeightedShift berger(const AtomicMeasure& mu);
  /// `horizon` is the minimum number of integers on which p > 0 is sampled.
  static WeightedShift poly_three_isometry(std::vector<double> p, std::size_t horizon = 64);

  WeightedShift scaled(double alpha) const;

  const Model& model() const noexcept { return model_; }
  double scale() const noexcept { return scale_; }
  /// "eventually_constant", "berger" or "poly3iso".
  std::string kind() const;

  double weight(std::size_t k) const;
  double weight_squared(std::size_t k) const;

 private:
  WeightedShift(Model model, double scale) : model_(std::move(model)), scale_(scale) {}

  Model model_;
  double scale_ = 1.0;
};

inline double weight(const WeightedShift& t, std::size_t k) { return t.weight(k); }

/// gamma_n(k) = ||T^n e_k||^2 = prod_{j<n} lambda_{k+j}^2, n = 0..N.
MomentSequence orbit_moments(const WeightedShift& t, std::size_t k, std::size_t order);

/// ||T*^n e_k||^2 = prod_{j=1}^{n} lambda_{k-j}^2 for n <= k, zero beyond.
MomentSequence adjoint_orbit_moments(const WeightedShift& t, std::size_t k, std::size_t order);

/// T^n is unitarily equivalent to the orthogonal sum of the shifts T_{n,r},
/// r = 0..n-1, with weights prod_{j<n} lambda_{r+kn+j}. Each summand has the
/// same family as T.
std::vector<WeightedShift> power_decompose(const WeightedShift& t, std::size_t n);

// ---------------------------------------------------------------------------
// Classification

enum class Verdict { Refuted, ConsistentUpTo, ExactTrue, ExactFalse };

std::string to_string(Verdict v);

inline bool holds(Verdict v) noexcept { return v == Verdict::ExactTrue || v == Verdict::ConsistentUpTo; }
inline bool fails(Verdict v) noexcept { return v == Verdict::Refuted || v == Verdict::ExactFalse; }

/// Finite certificate behind a negative verdict.
struct Witness {
  /// "hankel", "cpd_hankel", "difference", "weights", "adjoint" or "spectral".
  std::string kind;
  std::size_t basis_index = 0;
  /// Hankel offset, or moment index n for scalar witnesses.
  std::size_t offset = 0;
  /// Hankel section size; zero for scalar witnesses.
  std::size_t size = 0;
  std::vector<double> coefficients;
  double value = 0.0;
};

struct ClassVerdict {
  Verdict status = Verdict::ConsistentUpTo;
  std::optional<Witness> witness;
  std::size_t basis_range = 0;
  std::size_t order = 0;
  /// Set when a structural (exact) branch decided: the Hankel-branch outcome.
  std::optional<Verdict> generic_status;
  std::optional<Witness> generic_witness;

  bool holds() const noexcept { return cpd::holds(status); }
  bool fails() const noexcept { return cpd::fails(status); }
};

struct NormaloidVerdict {
  ClassVerdict verdict;
  double norm = 0.0;
  double spectral_radius = 0.0;
  bool radius_exact = false;
  /// Window length used for the estimate (0 when the radius is exact).
  std::size_t window = 0;
  /// Whether the windowed estimates were monotone in the window length.
  bool window_monotone = true;
};

struct ClassParams {
  std::size_t order = 24;
  std::size_t basis = 12;
  std::size_t horizon = 64;
  std::size_t m_isometry_order = 3;
  ToleranceConfig tol;

  void validate() const;
};

struct ClassReport {
  ClassVerdict subnormal;
  ClassVerdict quasinormal;
  ClassVerdict normal;
  ClassVerdict cpd;
  NormaloidVerdict normaloid;
  ClassVerdict m_isometry;
  std::size_t m = 3;
};

ClassVerdict classify_subnormal(const WeightedShift& t, std::size_t order, std::size_t basis,
                                const ToleranceConfig& tol);
ClassVerdict classify_cpd(const WeightedShift& t, std::size_t order, std::size_t basis,
                          const ToleranceConfig& tol);
ClassVerdict classify_quasinormal(const WeightedShift& t, std::size_t order, std::size_t basis,
                                  const ToleranceConfig& tol);
ClassVerdict classify_normal(const WeightedShift& t, std::size_t order, std::size_t basis,
                             const ToleranceConfig& tol);
ClassVerdict classify_m_isometry(const WeightedShift& t, std::size_t m, std::size_t order, std::size_t basis,
                                 const ToleranceConfig& tol);
NormaloidVerdict classify_normaloid(const WeightedShift& t, std::size_t horizon, const ToleranceConfig& tol);

/// Runs every classifier and enforces the class inclusions
/// quasinormal => subnormal => CPD; throws HierarchyViolation otherwise.
ClassReport classify_all(const WeightedShift& t, const ClassParams& params = {});

}  // namespace cpd
