#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cpdshift/triplet.hpp"
#include "cpdshift/wshift.hpp"

namespace cpd {

enum class EvidenceStatus { Supported, Vacuous, Violation };

std::string to_string(EvidenceStatus s);

struct NamedVerdict {
  std::string name;
  Verdict verdict = Verdict::ConsistentUpTo;
  std::optional<Witness> witness;
};

/// Side computation that the argument behind a root theorem relies on.
struct MechanismCheck {
  std::string name;
  bool passed = true;
  double value = 0.0;
  std::string detail;
};

struct RootEvidence {
  /// "subnormal", "quasinormal", "normal" or "3isometry".
  std::string theorem;
  std::size_t n = 0;
  /// m-isometry order of the power premise (3isometry only).
  std::size_t m = 0;
  std::vector<NamedVerdict> premises;
  NamedVerdict conclusion;
  /// Evaluated only when every premise holds.
  std::vector<MechanismCheck> mechanisms;
  EvidenceStatus status = EvidenceStatus::Vacuous;
};

RootEvidence verify_root_subnormal(const WeightedShift& t, std::size_t n, const ClassParams& params = {});
RootEvidence verify_root_quasinormal(const WeightedShift& t, std::size_t n, const ClassParams& params = {});
RootEvidence verify_root_normal(const WeightedShift& t, std::size_t n, const ClassParams& params = {});
RootEvidence verify_root_3isometry(const WeightedShift& t, std::size_t n, std::size_t m,
                                   const ClassParams& params = {});

/// Dispatch by theorem name; throws InvalidArgument for an unknown name.
RootEvidence verify_root(const std::string& theorem, const WeightedShift& t, std::size_t n,
                         const ClassParams& params = {}, std::size_t m = 3);

/// A family member together with the verdicts it is known to have.
struct Expectation {
  /// e.g. "normaloid", "cpd", "subnormal(T^2)".
  std::string property;
  /// "holds" or "fails", or an exact verdict name.
  std::string expected;
};

struct FamilyInstance {
  WeightedShift shift;
  std::vector<Expectation> expected;
};

/// Weights head[0..kappa-1] in (0, 1] relative to the tail, then the tail.
FamilyInstance stampfli_family(std::size_t kappa, const std::vector<double>& head, double tail = 1.0);

/// lambda_n = sqrt(p(n+1)/p(n)) with p of degree 1 or 2, positive on N.
FamilyInstance three_isometry_family(const std::vector<double>& p);

struct ScalingWitness {
  double alpha = 0.0;
  Witness witness;
};

/// First alpha on the grid for which alpha T fails the CPD test.
std::optional<ScalingWitness> cpd_scaling_witness(const WeightedShift& t, const std::vector<double>& alpha_grid,
                                                  const ClassParams& params = {});

/// `count` points spaced evenly in log between lo and hi.
std::vector<double> log_grid(double lo, double hi, std::size_t count);

// Random generators. Nodes are kept well separated: the moment-to-measure
// map is badly conditioned for clustered atoms.

/// 1 to max_atoms atoms in [0, 5], unit total mass. Nodes stay at least 0.1
/// away from 1 except for occasional atoms exactly at 1 or at 0.
AtomicMeasure random_probability_measure(std::mt19937_64& rng, std::size_t max_atoms = 4);
WeightedShift random_berger_shift(std::mt19937_64& rng);
WeightedShift random_stampfli_shift(std::mt19937_64& rng);
WeightedShift random_poly_shift(std::mt19937_64& rng);
/// Triplet with up to max_atoms atoms of F in [0, 5] minus (0.9, 1.1), c in
/// {0} or [0, 1], b in [-2, 2], whose reconstructed moments stay positive.
ScalarTriplet random_triplet(std::mt19937_64& rng, std::size_t max_atoms = 4);

/// Deterministic mix of Berger, Stampfli and polynomial specs.
std::vector<WeightedShift> random_corpus(std::uint64_t seed, std::size_t count);

}  // namespace cpd
