#include "cpdshift/roots.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace cpd {
namespace {

using Classifier = std::function<ClassVerdict(const WeightedShift&)>;

NamedVerdict named(std::string name, const ClassVerdict& v) { return {std::move(name), v.status, v.witness}; }

// gamma of the r-th summand at e_0 against gamma_{kn}(r) of T.
MechanismCheck stride_check(const WeightedShift& t, const std::vector<WeightedShift>& summands, std::size_t n,
                            const ClassParams& params) {
  MechanismCheck check;
  check.name = "power_stride";
  for (std::size_t r = 0; r < summands.size(); ++r) {
    const auto direct = orbit_moments(summands[r], 0, params.order);
    const auto strided = orbit_moments(t, r, n * params.order).stride(n);
    for (std::size_t k = 0; k <= params.order; ++k) {
      const double scale = std::max(std::abs(direct[k]), std::abs(strided[k]));
      const double rel = scale > 0.0 ? std::abs(direct[k] - strided[k]) / scale : 0.0;
      check.value = std::max(check.value, rel);
    }
  }
  check.passed = check.value <= params.tol.eps_eq;
  return check;
}

RootEvidence run_harness(const std::string& theorem, const WeightedShift& t, std::size_t n,
                         const ClassParams& params, const std::string& power_label, const Classifier& power_premise,
                         const NamedVerdict& conclusion,
                         const std::function<void(const std::vector<WeightedShift>&, RootEvidence&)>& extra = {}) {
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "root harnesses need n >= 2");
  params.validate();
  RootEvidence ev;
  ev.theorem = theorem;
  ev.n = n;
  ev.premises.push_back(named("cpd(T)", classify_cpd(t, params.order, params.basis, params.tol)));
  const auto summands = power_decompose(t, n);
  for (std::size_t r = 0; r < summands.size(); ++r)
    ev.premises.push_back(named(power_label + "(T^" + std::to_string(n) + ")[" + std::to_string(r) + "]",
                                power_premise(summands[r])));
  ev.conclusion = conclusion;

  const bool premises_hold =
      std::all_of(ev.premises.begin(), ev.premises.end(), [](const NamedVerdict& p) { return holds(p.verdict); });
  if (!premises_hold) {
    ev.status = EvidenceStatus::Vacuous;
    return ev;
  }
  ev.mechanisms.push_back(stride_check(t, summands, n, params));
  if (extra) extra(summands, ev);
  const bool mechanisms_ok =
      std::all_of(ev.mechanisms.begin(), ev.mechanisms.end(), [](const MechanismCheck& m) { return m.passed; });
  ev.status = fails(ev.conclusion.verdict) || !mechanisms_ok ? EvidenceStatus::Violation : EvidenceStatus::Supported;
  return ev;
}

double uniform(std::mt19937_64& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

bool coin(std::mt19937_64& rng, double p) { return std::bernoulli_distribution(p)(rng); }

// Up to `count` nodes in [0, 5] outside (0.9, 1.1), pairwise at least `gap` apart.
std::vector<double> separated_nodes(std::mt19937_64& rng, std::size_t count, double gap,
                                    const std::vector<double>& taken = {}) {
  std::vector<double> nodes;
  for (int attempt = 0; nodes.size() < count && attempt < 1000; ++attempt) {
    const double x = uniform(rng, 0.0, 5.0);
    if (std::abs(x - 1.0) < 0.1) continue;
    auto far = [&](double y) { return std::abs(x - y) >= gap; };
    if (std::all_of(nodes.begin(), nodes.end(), far) && std::all_of(taken.begin(), taken.end(), far))
      nodes.push_back(x);
  }
  return nodes;
}

constexpr double kNodeGap = 0.25;

}  // namespace

std::string to_string(EvidenceStatus s) {
  switch (s) {
    case EvidenceStatus::Supported: return "Supported";
    case EvidenceStatus::Vacuous: return "Vacuous";
    case EvidenceStatus::Violation: return "VIOLATION";
  }
  return "Unknown";
}

RootEvidence verify_root_subnormal(const WeightedShift& t, std::size_t n, const ClassParams& params) {
  const auto& p = params;
  return run_harness(
      "subnormal", t, n, p, "subnormal",
      [&](const WeightedShift& s) { return classify_subnormal(s, p.order, p.basis, p.tol); },
      named("subnormal(T)", classify_subnormal(t, p.order, p.basis, p.tol)));
}

RootEvidence verify_root_quasinormal(const WeightedShift& t, std::size_t n, const ClassParams& params) {
  const auto& p = params;
  return run_harness(
      "quasinormal", t, n, p, "quasinormal",
      [&](const WeightedShift& s) { return classify_quasinormal(s, p.order, p.basis, p.tol); },
      named("quasinormal(T)", classify_quasinormal(t, p.order, p.basis, p.tol)));
}

RootEvidence verify_root_normal(const WeightedShift& t, std::size_t n, const ClassParams& params) {
  const auto& p = params;
  return run_harness(
      "normal", t, n, p, "normal", [&](const WeightedShift& s) { return classify_normal(s, p.order, p.basis, p.tol); },
      named("normal(T)", classify_normal(t, p.order, p.basis, p.tol)));
}

RootEvidence verify_root_3isometry(const WeightedShift& t, std::size_t n, std::size_t m, const ClassParams& params) {
  if (m < 2) throw Error(ErrorCode::InvalidArgument, "m-isometry premise needs m >= 2");
  const auto& p = params;
  auto ev = run_harness(
      "3isometry", t, n, p, std::to_string(m) + "-isometry",
      [&](const WeightedShift& s) { return classify_m_isometry(s, m, p.order, p.basis, p.tol); },
      named("3-isometry(T)", classify_m_isometry(t, 3, p.order, p.basis, p.tol)),
      [&](const std::vector<WeightedShift>& summands, RootEvidence& out) {
        // Every orbit's second-difference measure lives on {1}.
        MechanismCheck support;
        support.name = "support_at_one";
        const double radius = std::sqrt(p.tol.eps_eq);
        for (std::size_t k = 0; k <= p.basis && support.passed; ++k) {
          const auto gamma = orbit_moments(t, k, p.order);
          const Vec<double> scale = second_difference_scale(gamma);
          try {
            const auto mu = recover_measure(second_difference(gamma), p.tol, &scale, {1.0});
            for (const auto& a : mu) {
              support.value = std::max(support.value, std::abs(a.node - 1.0));
              if (std::abs(a.node - 1.0) > radius) {
                support.passed = false;
                support.detail = "atom at " + std::to_string(a.node) + " for e_" + std::to_string(k);
              }
            }
          } catch (const Error& e) {
            support.passed = false;
            support.detail = e.what();
          }
        }
        out.mechanisms.push_back(support);

        MechanismCheck power;
        power.name = "power_is_3isometry";
        for (const auto& s : summands) {
          if (classify_m_isometry(s, 3, p.order, p.basis, p.tol).fails()) {
            power.passed = false;
            power.value += 1.0;
          }
        }
        out.mechanisms.push_back(power);
      });
  ev.m = m;
  return ev;
}

RootEvidence verify_root(const std::string& theorem, const WeightedShift& t, std::size_t n, const ClassParams& params,
                         std::size_t m) {
  if (theorem == "subnormal") return verify_root_subnormal(t, n, params);
  if (theorem == "quasinormal") return verify_root_quasinormal(t, n, params);
  if (theorem == "normal") return verify_root_normal(t, n, params);
  if (theorem == "3isometry") return verify_root_3isometry(t, n, m, params);
  throw Error(ErrorCode::InvalidArgument, "unknown theorem '" + theorem + "'");
}

// ---------------------------------------------------------------------------
// Families

FamilyInstance stampfli_family(std::size_t kappa, const std::vector<double>& head, double tail) {
  if (kappa < 2 || head.size() != kappa) throw Error(ErrorCode::InvalidFamily, "head length must equal kappa >= 2");
  if (!std::isfinite(tail) || !(tail > 0.0)) throw Error(ErrorCode::InvalidFamily, "tail must be positive");
  for (double h : head)
    if (!std::isfinite(h) || !(h > 0.0) || h > tail) throw Error(ErrorCode::InvalidFamily, "weights must lie in (0, tail]");
  bool interior_all_off = true;
  bool interior_some_off = false;
  for (std::size_t j = 1; j < kappa; ++j) {
    const bool off = head[j] != tail;
    interior_some_off = interior_some_off || off;
    interior_all_off = interior_all_off && off;
  }
  if (!interior_some_off) throw Error(ErrorCode::InvalidFamily, "some weight lambda_j, 1 <= j < kappa, must differ from the tail");

  FamilyInstance out{WeightedShift::eventually_constant(head, tail), {}};
  out.expected.push_back({"normaloid", "ExactTrue"});
  out.expected.push_back({"cpd", "fails"});
  out.expected.push_back({"subnormal", "ExactFalse"});
  for (std::size_t n = 2; n <= kappa + 1; ++n) {
    const std::string prop = "subnormal(T^" + std::to_string(n) + ")";
    if (n >= kappa)
      out.expected.push_back({prop, "holds"});
    else if (interior_all_off)
      out.expected.push_back({prop, "fails"});
  }
  return out;
}

FamilyInstance three_isometry_family(const std::vector<double>& p) {
  try {
    FamilyInstance out{WeightedShift::poly_three_isometry(p), {}};
    out.expected.push_back({"3-isometry", "holds"});
    out.expected.push_back({"cpd", "ConsistentUpTo"});
    out.expected.push_back({"normaloid", "ExactFalse"});
    out.expected.push_back({"subnormal", "Refuted"});
    return out;
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidFamily, e.what());
  }
}

std::optional<ScalingWitness> cpd_scaling_witness(const WeightedShift& t, const std::vector<double>& alpha_grid,
                                                  const ClassParams& params) {
  params.validate();
  for (double alpha : alpha_grid) {
    if (!std::isfinite(alpha) || !(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be positive");
    const auto v = classify_cpd(t.scaled(alpha), params.order, params.basis, params.tol);
    if (v.fails()) return ScalingWitness{alpha, *v.witness};
  }
  return std::nullopt;
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0) || !(hi >= lo)) throw Error(ErrorCode::InvalidArgument, "log grid needs 0 < lo <= hi");
  std::vector<double> out;
  for (std::size_t i = 0; i < count; ++i) {
    const double f = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    out.push_back(std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo))));
  }
  if (count > 1) out.back() = hi;
  return out;
}

// ---------------------------------------------------------------------------
// Random generators

AtomicMeasure random_probability_measure(std::mt19937_64& rng, std::size_t max_atoms) {
  const auto count = std::uniform_int_distribution<std::size_t>(1, std::max<std::size_t>(1, max_atoms))(rng);
  std::vector<double> fixed;
  if (coin(rng, 0.1)) fixed.push_back(1.0);
  // An atom at the origin needs company off the origin.
  if (fixed.size() + 1 < count && coin(rng, 0.05)) fixed.push_back(0.0);
  auto nodes = separated_nodes(rng, count - fixed.size(), kNodeGap, fixed);
  nodes.insert(nodes.end(), fixed.begin(), fixed.end());
  std::vector<Atom> atoms;
  double total = 0.0;
  for (double x : nodes) {
    const double m = uniform(rng, 0.1, 10.0);
    atoms.push_back({x, m});
    total += m;
  }
  for (auto& a : atoms) a.mass /= total;
  return AtomicMeasure(std::move(atoms));
}

WeightedShift random_berger_shift(std::mt19937_64& rng) { return WeightedShift::berger(random_probability_measure(rng)); }

WeightedShift random_stampfli_shift(std::mt19937_64& rng) {
  const auto kappa = std::uniform_int_distribution<std::size_t>(2, 4)(rng);
  std::vector<double> head(kappa);
  for (auto& h : head) h = coin(rng, 0.35) ? 1.0 : uniform(rng, 0.3, 0.95);
  bool interior_off = false;
  for (std::size_t j = 1; j < kappa; ++j) interior_off = interior_off || head[j] != 1.0;
  if (!interior_off) head[std::uniform_int_distribution<std::size_t>(1, kappa - 1)(rng)] = uniform(rng, 0.3, 0.95);
  return stampfli_family(kappa, head).shift;
}

WeightedShift random_poly_shift(std::mt19937_64& rng) {
  const double c0 = uniform(rng, 0.5, 3.0);
  const bool quadratic = coin(rng, 0.5);
  const double c1 = quadratic ? uniform(rng, 0.0, 3.0) : uniform(rng, 0.2, 3.0);
  std::vector<double> p{c0, c1};
  if (quadratic) p.push_back(uniform(rng, 0.2, 2.0));
  return three_isometry_family(p).shift;
}

ScalarTriplet random_triplet(std::mt19937_64& rng, std::size_t max_atoms) {
  for (;;) {
    const auto count = std::uniform_int_distribution<std::size_t>(0, max_atoms)(rng);
    const double c = coin(rng, 0.5) ? 0.0 : uniform(rng, 0.0, 1.0);
    // The atom 2c at 1 is one more node of the second-difference measure.
    const auto nodes = separated_nodes(rng, count, kNodeGap, c > 0.0 ? std::vector<double>{1.0} : std::vector<double>{});
    std::vector<Atom> atoms;
    for (double x : nodes) atoms.push_back({x, uniform(rng, 0.1, 10.0)});
    const double b = uniform(rng, -2.0, 2.0);
    ScalarTriplet t{b, c, AtomicMeasure(std::move(atoms))};
    const std::size_t r = t.F.size() + (c > 0.0 ? 1 : 0);
    const auto gamma = reconstruct_moments(t, 2 * r + 4);
    if ((gamma.values().array() > 0.0).all()) return t;
  }
}

std::vector<WeightedShift> random_corpus(std::uint64_t seed, std::size_t count) {
  std::mt19937_64 rng(seed);
  std::vector<WeightedShift> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    switch (i % 3) {
      case 0: out.push_back(random_berger_shift(rng)); break;
      case 1: out.push_back(random_stampfli_shift(rng)); break;
      default: out.push_back(random_poly_shift(rng)); break;
    }
  }
  return out;
}

}  // namespace cpd
