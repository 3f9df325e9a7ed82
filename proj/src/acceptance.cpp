#include "cpdshift/acceptance.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <sstream>

#include "cpdshift/roots.hpp"
#include "cpdshift/triplet.hpp"
#include "cpdshift/wshift.hpp"

namespace cpd {
namespace {

struct Outcome {
  bool passed = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (passed) detail << "FAILED: ";
      else detail << "; ";
      detail << what;
      passed = false;
    }
  }
};

// Same atom count and pairwise agreement after sorting. `relative` scales
// both tolerances by max(1, |value|).
bool measures_match(const AtomicMeasure& a, const AtomicMeasure& b, double node_tol, double mass_tol, bool relative,
                    double* worst = nullptr) {
  if (a.size() != b.size()) return false;
  double err = 0.0;
  bool ok = true;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a.atoms()[i];
    const auto& y = b.atoms()[i];
    const double ns = relative ? std::max(1.0, std::abs(y.node)) : 1.0;
    const double ms = relative ? std::max(1.0, std::abs(y.mass)) : 1.0;
    const double dn = std::abs(x.node - y.node) / ns;
    const double dm = std::abs(x.mass - y.mass) / ms;
    err = std::max({err, dn, dm});
    ok = ok && dn <= node_tol && dm <= mass_tol;
  }
  if (worst) *worst = err;
  return ok;
}

double witness_form(const MomentSequence& values, const Witness& w) {
  const auto h = hankel(values, w.offset, w.size);
  const Eigen::Map<const Vec<double>> v(w.coefficients.data(), static_cast<Eigen::Index>(w.coefficients.size()));
  return v.dot(h * v);
}

// The orbit sequence a witness refers to (second differences for CPD witnesses).
MomentSequence witness_sequence(const WeightedShift& t, const Witness& w, std::size_t order) {
  const auto gamma = orbit_moments(t, w.basis_index, order);
  return w.kind == "cpd_hankel" ? second_difference(gamma) : gamma;
}

void criterion_stampfli(Outcome& out, const ToleranceConfig& tol) {
  const auto start = std::chrono::steady_clock::now();
  ClassParams params;
  params.tol = tol;
  const auto t = stampfli_family(2, {1.0, 0.5}).shift;
  const auto report = classify_all(t, params);
  out.require(report.normaloid.verdict.status == Verdict::ExactTrue, "normaloid not ExactTrue");
  out.require(report.subnormal.status == Verdict::ExactFalse, "subnormal not ExactFalse");
  out.require(report.subnormal.generic_status == Verdict::Refuted, "generic branch did not refute subnormality");
  if (report.subnormal.generic_witness) {
    const auto& w = *report.subnormal.generic_witness;
    const std::size_t reach = w.offset + 2 * (w.size - 1);
    out.require(reach <= 8, "Hankel refutation needs moments beyond order 8");
    const double form = witness_form(orbit_moments(t, w.basis_index, params.order), w);
    out.require(form < 0.0, "subnormality witness form is not negative");
    out.detail << "subnormal witness e_" << w.basis_index << " offset " << w.offset << " size " << w.size
               << " form " << form << "; ";
  }
  out.require(report.cpd.status == Verdict::Refuted, "CPD not refuted");
  if (report.cpd.witness) {
    const double form = witness_form(witness_sequence(t, *report.cpd.witness, params.order), *report.cpd.witness);
    out.require(form < 0.0, "CPD witness form is not negative");
  }
  for (const auto& s : power_decompose(t, 2))
    out.require(classify_subnormal(s, params.order, params.basis, tol).holds(), "a summand of T^2 is not subnormal");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.require(secs < 1.0, "runtime above 1 s");
}

void criterion_boundary(Outcome& out, const ToleranceConfig& tol) {
  ClassParams params;
  params.tol = tol;
  const std::array<double, 3> alphas{0.9, 1.0, 1.1};
  for (double alpha : alphas) {
    const auto t = WeightedShift::eventually_constant({alpha}, 1.0);
    const auto v = classify_subnormal(t, params.order, params.basis, tol);
    const bool expect = alpha <= 1.0;
    out.require(expect ? v.status == Verdict::ExactTrue : v.status == Verdict::ExactFalse,
                "exact branch wrong at alpha " + std::to_string(alpha));
    out.require(v.generic_status && (expect ? !fails(*v.generic_status) : *v.generic_status == Verdict::Refuted),
                "generic branch disagrees at alpha " + std::to_string(alpha));
    out.detail << "alpha " << alpha << ": " << to_string(v.status) << "/"
               << (v.generic_status ? to_string(*v.generic_status) : "none") << "; ";
  }
}

void criterion_q_poly(Outcome& out, const ToleranceConfig& tol) {
  std::vector<double> grid;
  for (int i = 0; i <= 200; ++i) grid.push_back(0.05 * i);
  for (double d : {1e-9, 1e-6, 5e-5, 9.99e-5, 1.0001e-4, 2e-4, 1e-3}) {
    grid.push_back(1.0 + d);
    grid.push_back(1.0 - d);
  }
  double worst_rec = 0.0;
  double worst_dual = 0.0;
  for (double x : grid) {
    for (std::size_t n = 0; n <= 40; ++n) {
      const double q0 = q_poly(n, x, tol);
      const double q1 = q_poly(n + 1, x, tol);
      const double q2 = q_poly(n + 2, x, tol);
      const double power = std::pow(x, static_cast<double>(n));
      const double denom = std::max({std::abs(power), std::abs(q2) + 2.0 * std::abs(q1) + std::abs(q0), 1e-300});
      worst_rec = std::max(worst_rec, std::abs(q2 - 2.0 * q1 + q0 - power) / denom);

      if (std::abs(x - 1.0) >= tol.singular_band && n >= 2) {
        long double sum = 0.0L;
        for (std::size_t j = n - 1; j-- > 0;) sum = sum * x + static_cast<long double>(n - j - 1);
        const double oracle = static_cast<double>(sum);
        worst_dual = std::max(worst_dual, std::abs(q0 - oracle) / std::max(1e-300, std::abs(oracle)));
      }
    }
  }
  out.detail << "recurrence max rel " << worst_rec << ", dual-form max rel " << worst_dual << "; ";
  out.require(worst_rec <= 1e-10, "recurrence error above 1e-10");
  out.require(worst_dual <= 1e-10, "closed and sum forms differ above 1e-10");
}

void criterion_triplet_roundtrip(Outcome& out, const ToleranceConfig& tol) {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240611);
  int failures = 0;
  double worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    const auto t = random_triplet(rng);
    const std::size_t r = t.F.size() + (t.c > 0.0 ? 1 : 0);
    try {
      const auto back = recover_triplet(reconstruct_moments(t, std::max<std::size_t>(2 * r + 4, 5), tol), tol);
      double err = 0.0;
      const bool ok = std::abs(back.b - t.b) <= 1e-6 && std::abs(back.c - t.c) <= 1e-6 &&
                      measures_match(back.F, t.F, 1e-6, 1e-6, false, &err);
      worst = std::max({worst, err, std::abs(back.b - t.b), std::abs(back.c - t.c)});
      if (!ok && ++failures <= 3) out.detail << "triplet " << i << " error " << err << "; ";
    } catch (const Error& e) {
      ++failures;
      if (failures <= 3) out.detail << "triplet " << i << ": " << e.what() << "; ";
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.detail << failures << "/200 mismatches, worst error " << worst << "; ";
  out.require(failures == 0, "roundtrip mismatches");
  out.require(secs < 5.0, "runtime above 5 s");
}

std::vector<WeightedShift> berger_corpus() {
  std::mt19937_64 rng(77);
  std::vector<WeightedShift> out;
  for (int i = 0; i < 100; ++i) out.push_back(random_berger_shift(rng));
  return out;
}

constexpr std::size_t kBergerOrder = 14;

void criterion_subnormal_pipeline(Outcome& out, const ToleranceConfig& tol) {
  int failures = 0;
  double worst_measure = 0.0;
  double worst_moment = 0.0;
  for (const auto& t : berger_corpus()) {
    const auto& mu = std::get<BergerGenerated>(t.model()).measure;
    try {
      const auto gamma = orbit_moments(t, 0, kBergerOrder);
      const auto trip = recover_triplet(gamma, tol);
      const auto cert = subnormality_certificate(trip, tol);
      bool ok = cert.passed;
      if (ok) {
        const auto berger = berger_measure(trip, tol);
        double err = 0.0;
        ok = measures_match(berger, mu, 1e-6, 1e-6, false, &err);
        worst_measure = std::max(worst_measure, err);
        const auto from_berger = moments(berger, kBergerOrder);
        for (std::size_t n = 0; n <= kBergerOrder; ++n) {
          const double rel = std::abs(from_berger[n] - gamma[n]) / std::max(1.0, std::abs(gamma[n]));
          worst_moment = std::max(worst_moment, rel);
          ok = ok && rel <= 1e-8;
        }
      }
      if (!ok) ++failures;
    } catch (const Error& e) {
      ++failures;
      if (failures <= 3) out.detail << e.what() << "; ";
    }
  }
  out.detail << failures << "/100 failures, Berger measure max error " << worst_measure << ", moment max rel error "
             << worst_moment << "; ";
  out.require(failures == 0, "subnormal pipeline failures");
}

void criterion_power_law(Outcome& out, const ToleranceConfig& tol) {
  int failures = 0;
  double worst_measure = 0.0;
  double worst_bn = 0.0;
  std::ostringstream failed;
  const auto corpus = berger_corpus();
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const auto& t = corpus[i];
    std::size_t n = 0;
    try {
      const auto trip = recover_triplet(orbit_moments(t, 0, kBergerOrder), tol);
      for (std::size_t power : {2u, 3u}) {
        n = power;
        const auto predicted = power_transform(trip, n, tol);
        const auto power_orbit = orbit_moments(t, 0, n * kBergerOrder).stride(n);
        const Vec<double> scale = second_difference_scale(power_orbit);
        const auto recovered = recover_measure(second_difference(power_orbit), tol, &scale, {1.0});
        double err = 0.0;
        bool ok = measures_match(recovered, predicted, 1e-6, 1e-6, true, &err);
        worst_measure = std::max(worst_measure, err);
        const double residual = b_n_identity_check(trip, n, tol);
        worst_bn = std::max(worst_bn, residual);
        ok = ok && residual <= 1e-6;
        if (!ok) {
          ++failures;
          failed << " #" << i << "/n=" << n << (recovered.size() == predicted.size() ? "" : "(atom count)");
        }
      }
    } catch (const Error& e) {
      ++failures;
      failed << " #" << i << "/n=" << n << "(" << to_string(e.code()) << ")";
    }
  }
  out.detail << failures << "/200 failures, measure max rel error " << worst_measure << ", b_n max residual "
             << worst_bn << "; ";
  if (failures) out.detail << "failing shifts:" << failed.str() << "; ";
  out.require(failures == 0, "power-transform mismatches");
}

void criterion_roots(Outcome& out, const ToleranceConfig& tol) {
  const auto start = std::chrono::steady_clock::now();
  ClassParams params;
  params.tol = tol;
  const auto corpus = random_corpus(12345, 500);
  std::size_t records = 0;
  std::size_t violations = 0;
  std::size_t supported = 0;
  std::size_t stampfli_bad = 0;
  for (const auto& t : corpus) {
    for (std::size_t n : {2u, 3u}) {
      for (const char* theorem : {"subnormal", "quasinormal", "normal", "3isometry"}) {
        const auto ev = verify_root(theorem, t, n, params);
        ++records;
        if (ev.status == EvidenceStatus::Violation) {
          ++violations;
          if (violations <= 3) out.detail << "VIOLATION " << theorem << " n=" << n << " on " << t.kind() << "; ";
        }
        if (ev.status == EvidenceStatus::Supported) ++supported;
        if (t.kind() == "eventually_constant" && std::string(theorem) == "subnormal") {
          const bool ok = ev.status == EvidenceStatus::Vacuous && ev.premises.front().verdict == Verdict::Refuted;
          if (!ok) ++stampfli_bad;
        }
      }
    }
  }
  const auto canonical = verify_root_subnormal(stampfli_family(2, {1.0, 0.5}).shift, 2, params);
  out.require(canonical.status == EvidenceStatus::Vacuous && canonical.premises.front().verdict == Verdict::Refuted,
              "canonical Stampfli instance not Vacuous through a refuted CPD premise");
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  out.detail << records << " records, " << violations << " violations, " << supported << " supported, "
             << stampfli_bad << " Stampfli records not Vacuous-by-CPD; ";
  out.require(violations == 0, "VIOLATION records present");
  out.require(stampfli_bad == 0, "Stampfli subnormal roots not Vacuous with CPD refuted");
  out.require(secs < 60.0, "runtime above 60 s");
}

void criterion_three_isometry(Outcome& out, const ToleranceConfig& tol) {
  ClassParams params;
  params.tol = tol;
  const auto t = three_isometry_family({1.0, 1.0}).shift;
  double worst = 0.0;
  for (std::size_t k = 0; k <= params.basis; ++k) {
    const auto d3 = finite_difference(orbit_moments(t, k, params.order), 3);
    worst = std::max(worst, d3.values().cwiseAbs().maxCoeff());
  }
  out.require(worst <= 1e-9, "third differences above 1e-9");
  const auto report = classify_all(t, params);
  const auto& nv = report.normaloid;
  out.require(nv.radius_exact, "spectral radius not exact");
  out.require(std::abs(nv.norm - std::sqrt(2.0)) <= 4 * std::numeric_limits<double>::epsilon(), "norm is not sqrt 2");
  out.require(nv.spectral_radius == 1.0, "spectral radius is not 1");
  out.require(nv.verdict.status == Verdict::ExactFalse, "normaloid not ExactFalse");
  out.require(report.cpd.status == Verdict::ConsistentUpTo, "CPD not ConsistentUpTo");
  out.require(report.subnormal.status == Verdict::Refuted, "subnormal not Refuted");
  const auto ev = verify_root_3isometry(t, 2, 3, params);
  out.require(ev.status == EvidenceStatus::Supported, "3-isometry root harness not Supported");
  out.detail << "max |third difference| " << worst << ", norm " << nv.norm << ", r " << nv.spectral_radius << "; ";
}

void criterion_scaling(Outcome& out, const ToleranceConfig& tol) {
  ClassParams params;
  params.tol = tol;
  const auto grid = log_grid(0.25, 4.0, 32);
  const auto t = three_isometry_family({1.0, 1.0}).shift;
  const auto hit = cpd_scaling_witness(t, grid, params);
  out.require(hit.has_value(), "no refuting alpha for the 3-isometry shift");
  if (hit) {
    const double form = witness_form(witness_sequence(t.scaled(hit->alpha), hit->witness, params.order), hit->witness);
    out.require(form < 0.0, "scaling witness form is not negative");
    out.detail << "alpha " << hit->alpha << " refutes with form " << form << " on e_" << hit->witness.basis_index
               << "; ";
  }
  std::mt19937_64 rng(99);
  int false_hits = 0;
  for (int i = 0; i < 20; ++i)
    if (cpd_scaling_witness(random_berger_shift(rng), grid, params)) ++false_hits;
  out.detail << false_hits << "/20 Berger shifts refuted; ";
  out.require(false_hits == 0, "a Berger shift was refuted under scaling");
}

// Integer coefficient vectors in {-3..3}^m; the form is an exact integer.
bool brute_force_negative(const std::vector<int>& seq) {
  const std::size_t m = (seq.size() - 1) / 2 + 1;
  std::vector<int> v(m, -3);
  for (;;) {
    long long form = 0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) form += static_cast<long long>(v[i]) * v[j] * seq[i + j];
    if (form < 0) return true;
    std::size_t pos = 0;
    while (pos < m && v[pos] == 3) v[pos++] = -3;
    if (pos == m) return false;
    ++v[pos];
  }
}

void criterion_oracle(Outcome& out, const ToleranceConfig& tol) {
  std::size_t total = 0;
  std::size_t mismatches = 0;
  std::size_t extra_refutations = 0;
  for (std::size_t len = 3; len <= 7; ++len) {
    std::vector<int> seq(len, -2);
    for (;;) {
      ++total;
      const bool brute = brute_force_negative(seq);
      std::vector<double> values(seq.begin(), seq.end());
      const bool refuted = is_pd(MomentSequence(values), tol).refuted();
      if (brute && !refuted) ++mismatches;
      if (!brute && refuted) ++extra_refutations;
      std::size_t pos = 0;
      while (pos < len && seq[pos] == 2) seq[pos++] = -2;
      if (pos == len) break;
      ++seq[pos];
    }
  }
  out.detail << total << " sequences, " << mismatches << " mismatches, " << extra_refutations
             << " refutations finer than the grid; ";
  out.require(mismatches == 0, "brute-force negative direction missed by is_pd");
}

}  // namespace

std::vector<CriterionResult> run_acceptance(const ToleranceConfig& tol) {
  tol.validate();
  using Check = std::function<void(Outcome&, const ToleranceConfig&)>;
  const std::vector<std::pair<std::string, Check>> checks{
      {"Stampfli instance verdicts", criterion_stampfli},
      {"alpha-shift boundary flip", criterion_boundary},
      {"Q_n recurrence and dual-form agreement", criterion_q_poly},
      {"triplet roundtrip", criterion_triplet_roundtrip},
      {"subnormal pipeline on Berger shifts", criterion_subnormal_pipeline},
      {"power-transform law", criterion_power_law},
      {"root harnesses", criterion_roots},
      {"3-isometry example", criterion_three_isometry},
      {"scaling witness", criterion_scaling},
      {"brute-force PD oracle", criterion_oracle},
  };
  std::vector<CriterionResult> results;
  int id = 0;
  for (const auto& [title, check] : checks) {
    CriterionResult r;
    r.id = ++id;
    r.title = title;
    Outcome out;
    const auto start = std::chrono::steady_clock::now();
    try {
      check(out, tol);
    } catch (const std::exception& e) {
      out.require(false, std::string("exception: ") + e.what());
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    r.passed = out.passed;
    r.detail = out.detail.str();
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace cpd
