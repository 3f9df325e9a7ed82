#include "cpdshift/wshift.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cpd {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_positive(double v, const char* what) {
  if (!std::isfinite(v) || !(v > 0.0)) throw Error(ErrorCode::InvalidSpec, std::string(what) + " must be positive");
}

// Largest modulus of a root of p (degree 1 or 2).
double root_modulus(const std::vector<double>& p) {
  if (p.size() == 2) return std::abs(p[0] / p[1]);
  const double a = p[2];
  const double b = p[1];
  const double c = p[0];
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::sqrt(c / a);
  const double s = std::sqrt(disc);
  return std::max(std::abs((-b + s) / (2.0 * a)), std::abs((-b - s) / (2.0 * a)));
}

// sup_{n >= 0} p(n+1)/p(n). Past the last critical point of the ratio it
// decreases towards one, so a finite scan is exact.
double poly_sup_ratio(const PolyThreeIsometry& poly, std::size_t horizon) {
  double last_critical = 0.0;
  if (poly.p.size() == 3) {
    const double a = poly.p[2];
    const double b = poly.p[1];
    const double c = poly.p[0];
    // d/dt [(2at + a + b) / p(t)] has numerator -2a^2 t^2 - 2a(a+b) t + (2ac - ab - b^2).
    const double qa = -2.0 * a * a;
    const double qb = -2.0 * a * (a + b);
    const double qc = 2.0 * a * c - a * b - b * b;
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc >= 0.0) {
      const double s = std::sqrt(disc);
      last_critical = std::max((-qb + s) / (2.0 * qa), (-qb - s) / (2.0 * qa));
    }
  }
  const auto stop = std::max<std::size_t>(
      horizon, static_cast<std::size_t>(std::min(1e7, std::max(0.0, std::ceil(last_critical)) + 2.0)));
  double best = 1.0;
  for (std::size_t n = 0; n <= stop; ++n) {
    const double x = static_cast<double>(n);
    best = std::max(best, poly(x + 1.0) / poly(x));
  }
  return best;
}

Witness hankel_witness(const HankelWitness<double>& w, std::size_t k, const char* kind) {
  Witness out;
  out.kind = kind;
  out.basis_index = k;
  out.offset = w.offset;
  out.size = w.size;
  out.coefficients.assign(w.coefficients.data(), w.coefficients.data() + w.coefficients.size());
  out.value = w.form_value;
  return out;
}

void require_order(std::size_t order, std::size_t minimum, const char* who) {
  if (order < minimum)
    throw Error(ErrorCode::OrderTooSmall, std::string(who) + " needs order >= " + std::to_string(minimum));
}

}  // namespace

// ---------------------------------------------------------------------------
// WeightedShift

WeightedShift WeightedShift::eventually_constant(std::vector<double> head, double tail) {
  for (double h : head) require_positive(h, "head weight");
  require_positive(tail, "tail weight");
  return WeightedShift(EventuallyConstant{std::move(head), tail}, 1.0);
}

WeightedShift WeightedShift::berger(const AtomicMeasure& mu) {
  if (mu.empty() || !(mu.max_node() > 0.0))
    throw Error(ErrorCode::InvalidSpec, "Berger measure needs an atom off the origin");
  const double total = mu.total_mass();
  std::vector<Atom> atoms;
  for (const auto& a : mu) atoms.push_back({a.node, a.mass / total});
  return WeightedShift(BergerGenerated{AtomicMeasure(std::move(atoms), 0.0)}, 1.0);
}

WeightedShift WeightedShift::poly_three_isometry(std::vector<double> p, std::size_t horizon) {
  for (double c : p)
    if (!std::isfinite(c)) throw Error(ErrorCode::InvalidSpec, "non-finite polynomial coefficient");
  while (!p.empty() && p.back() == 0.0) p.pop_back();
  if (p.size() < 2 || p.size() > 3) throw Error(ErrorCode::InvalidSpec, "polynomial degree must be 1 or 2");
  if (!(p.back() > 0.0)) throw Error(ErrorCode::InvalidSpec, "leading coefficient must be positive");
  PolyThreeIsometry poly{std::move(p)};
  const double reach = 10.0 * std::max(1.0, root_modulus(poly.p));
  const auto samples = std::max<std::size_t>(horizon, static_cast<std::size_t>(std::ceil(std::min(reach, 1e7))));
  for (std::size_t n = 0; n <= samples; ++n)
    if (!(poly(static_cast<double>(n)) > 0.0))
      throw Error(ErrorCode::InvalidSpec, "p(n) must be positive for every n >= 0");
  return WeightedShift(std::move(poly), 1.0);
}

WeightedShift WeightedShift::scaled(double alpha) const {
  require_positive(alpha, "scale");
  return WeightedShift(model_, scale_ * alpha);
}

std::string WeightedShift::kind() const {
  return std::visit(overloaded{[](const EventuallyConstant&) { return std::string("eventually_constant"); },
                               [](const BergerGenerated&) { return std::string("berger"); },
                               [](const PolyThreeIsometry&) { return std::string("poly3iso"); }},
                    model_);
}

double WeightedShift::weight_squared(std::size_t k) const {
  const double base = std::visit(
      overloaded{[k](const EventuallyConstant& ec) {
                   const double w = k < ec.head.size() ? ec.head[k] : ec.tail;
                   return w * w;
                 },
                 [k](const BergerGenerated& bg) {
                   const double top = bg.measure.max_node();
                   double lower = 0.0;
                   double upper = 0.0;
                   for (const auto& a : bg.measure) {
                     const double t = a.node / top;
                     const double pk = std::pow(t, static_cast<double>(k));
                     lower += a.mass * pk;
                     upper += a.mass * pk * t;
                   }
                   return top * upper / lower;
                 },
                 [k](const PolyThreeIsometry& poly) {
                   const double x = static_cast<double>(k);
                   return poly(x + 1.0) / poly(x);
                 }},
      model_);
  return scale_ * scale_ * base;
}

double WeightedShift::weight(std::size_t k) const { return std::sqrt(weight_squared(k)); }

// ---------------------------------------------------------------------------
// Orbits and powers

MomentSequence orbit_moments(const WeightedShift& t, std::size_t k, std::size_t order) {
  std::vector<double> out(order + 1);
  double running = 1.0;
  for (std::size_t n = 0; n <= order; ++n) {
    out[n] = running;
    running *= t.weight_squared(k + n);
  }
  return MomentSequence(out);
}

MomentSequence adjoint_orbit_moments(const WeightedShift& t, std::size_t k, std::size_t order) {
  std::vector<double> out(order + 1, 0.0);
  double running = 1.0;
  for (std::size_t n = 0; n <= order && n <= k; ++n) {
    out[n] = running;
    if (n < k) running *= t.weight_squared(k - n - 1);
  }
  return MomentSequence(out);
}

std::vector<WeightedShift> power_decompose(const WeightedShift& t, std::size_t n) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "power must be positive");
  const double summand_scale = std::pow(t.scale(), static_cast<double>(n));
  std::vector<WeightedShift> out;
  out.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    WeightedShift summand = std::visit(
        overloaded{
            [&](const EventuallyConstant& ec) {
              const std::size_t head_len = (ec.head.size() + n - 1) / n;
              auto base = [&](std::size_t idx) { return idx < ec.head.size() ? ec.head[idx] : ec.tail; };
              std::vector<double> head(head_len);
              for (std::size_t k = 0; k < head_len; ++k) {
                double prod = 1.0;
                for (std::size_t j = 0; j < n; ++j) prod *= base(r + k * n + j);
                head[k] = prod;
              }
              return WeightedShift::eventually_constant(std::move(head),
                                                        std::pow(ec.tail, static_cast<double>(n)));
            },
            [&](const BergerGenerated& bg) {
              // gamma'_k = gamma_{r+kn} / gamma_r: push x^r mu forward by x -> x^n.
              std::vector<Atom> atoms;
              for (const auto& a : bg.measure) {
                const double w = a.mass * std::pow(a.node, static_cast<double>(r));
                if (w > 0.0) atoms.push_back({a.node, w});
              }
              return WeightedShift::berger(pushforward_power(AtomicMeasure(std::move(atoms), 0.0), n));
            },
            [&](const PolyThreeIsometry& poly) {
              // p'(k) = p(r + kn).
              const double rr = static_cast<double>(r);
              const double nn = static_cast<double>(n);
              std::vector<double> q(poly.p.size(), 0.0);
              const double c0 = poly.p[0];
              const double c1 = poly.p[1];
              const double c2 = poly.p.size() == 3 ? poly.p[2] : 0.0;
              q[0] = c0 + c1 * rr + c2 * rr * rr;
              q[1] = c1 * nn + 2.0 * c2 * rr * nn;
              if (q.size() == 3) q[2] = c2 * nn * nn;
              return WeightedShift::poly_three_isometry(std::move(q));
            }},
        t.model());
    out.push_back(summand_scale == 1.0 ? summand : summand.scaled(summand_scale));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Classification

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Refuted: return "Refuted";
    case Verdict::ConsistentUpTo: return "ConsistentUpTo";
    case Verdict::ExactTrue: return "ExactTrue";
    case Verdict::ExactFalse: return "ExactFalse";
  }
  return "Unknown";
}

void ClassParams::validate() const {
  tol.validate();
  if (order < 4) throw Error(ErrorCode::InvalidArgument, "order N must be at least 4");
  if (basis < 1) throw Error(ErrorCode::InvalidArgument, "basis range K must be at least 1");
  if (horizon < 2) throw Error(ErrorCode::InvalidArgument, "horizon must be at least 2");
  if (m_isometry_order < 1) throw Error(ErrorCode::InvalidArgument, "m-isometry order must be positive");
}

ClassVerdict classify_subnormal(const WeightedShift& t, std::size_t order, std::size_t basis,
                                const ToleranceConfig& tol) {
  require_order(order, 4, "classify_subnormal");
  ClassVerdict v;
  v.basis_range = basis;
  v.order = order;

  Verdict generic = Verdict::ConsistentUpTo;
  std::optional<Witness> generic_witness;
  for (std::size_t k = 0; k <= basis; ++k) {
    const auto pv = is_stieltjes(orbit_moments(t, k, order), tol);
    if (pv.refuted()) {
      generic = Verdict::Refuted;
      generic_witness = hankel_witness(*pv.witness, k, "hankel");
      break;
    }
  }

  // Structural criteria: alpha-shifts {alpha, 1, 1, ...} are subnormal iff
  // alpha <= 1; any other non-unit head entry past index 0 rules it out.
  // Subnormality is scale invariant, so the tail is normalized to one.
  std::optional<Verdict> exact = std::visit(
      overloaded{[&](const EventuallyConstant& ec) -> std::optional<Verdict> {
                   std::vector<double> head;
                   for (double h : ec.head) head.push_back(h / ec.tail);
                   while (!head.empty() && std::abs(head.back() - 1.0) <= tol.eps_eq) head.pop_back();
                   if (head.empty()) return Verdict::ExactTrue;
                   if (head.size() == 1) return head[0] <= 1.0 + tol.eps_eq ? Verdict::ExactTrue : Verdict::ExactFalse;
                   return Verdict::ExactFalse;
                 },
                 [](const BergerGenerated&) -> std::optional<Verdict> { return Verdict::ExactTrue; },
                 [](const PolyThreeIsometry&) -> std::optional<Verdict> { return std::nullopt; }},
      t.model());

  if (exact) {
    v.status = *exact;
    v.generic_status = generic;
    v.generic_witness = generic_witness;
    if (*exact == Verdict::ExactFalse) v.witness = generic_witness;
  } else {
    v.status = generic;
    v.witness = generic_witness;
  }
  return v;
}

ClassVerdict classify_cpd(const WeightedShift& t, std::size_t order, std::size_t basis, const ToleranceConfig& tol) {
  require_order(order, 4, "classify_cpd");
  ClassVerdict v;
  v.basis_range = basis;
  v.order = order;
  for (std::size_t k = 0; k <= basis; ++k) {
    const auto pv = is_cpd(orbit_moments(t, k, order), tol);
    if (pv.refuted()) {
      v.status = Verdict::Refuted;
      v.witness = hankel_witness(*pv.witness, k, "cpd_hankel");
      return v;
    }
  }
  return v;
}

ClassVerdict classify_quasinormal(const WeightedShift& t, std::size_t order, std::size_t basis,
                                  const ToleranceConfig& tol) {
  require_order(order, 2, "classify_quasinormal");
  ClassVerdict v;
  v.basis_range = basis;
  v.order = order;

  std::size_t samples = basis + order;
  if (const auto* ec = std::get_if<EventuallyConstant>(&t.model())) samples = std::max(samples, ec->head.size());
  std::vector<double> w(samples + 1);
  for (std::size_t k = 0; k <= samples; ++k) w[k] = t.weight(k);
  const double top = *std::max_element(w.begin(), w.end());
  for (std::size_t k = 1; k <= samples; ++k) {
    if (std::abs(w[k] - w[0]) > tol.eps_eq * top) {
      v.status = Verdict::ExactFalse;
      Witness wit;
      wit.kind = "weights";
      wit.basis_index = k;
      wit.value = w[k] - w[0];
      v.witness = wit;
      return v;
    }
  }
  v.status = Verdict::ExactTrue;
  return v;
}

ClassVerdict classify_normal(const WeightedShift& t, std::size_t order, std::size_t basis, const ToleranceConfig&) {
  require_order(order, 1, "classify_normal");
  ClassVerdict v;
  v.basis_range = basis;
  v.order = order;
  // ||T e_0||^2 = lambda_0^2 > 0 while T* e_0 = 0.
  const double forward = orbit_moments(t, 0, 1)[1];
  const double backward = adjoint_orbit_moments(t, 0, 1)[1];
  v.status = Verdict::ExactFalse;
  Witness wit;
  wit.kind = "adjoint";
  wit.basis_index = 0;
  wit.offset = 1;
  wit.value = forward - backward;
  v.witness = wit;
  return v;
}

ClassVerdict classify_m_isometry(const WeightedShift& t, std::size_t m, std::size_t order, std::size_t basis,
                                 const ToleranceConfig& tol) {
  require_order(order, m, "classify_m_isometry");
  ClassVerdict v;
  v.basis_range = basis;
  v.order = order;
  for (std::size_t k = 0; k <= basis; ++k) {
    const auto gamma = orbit_moments(t, k, order);
    const auto diff = finite_difference(gamma, m);
    const double threshold = tol.eps_eq * gamma.values().cwiseAbs().maxCoeff();
    for (std::size_t n = 0; n < diff.size(); ++n) {
      if (std::abs(diff[n]) > threshold) {
        v.status = Verdict::Refuted;
        Witness wit;
        wit.kind = "difference";
        wit.basis_index = k;
        wit.offset = n;
        wit.value = diff[n];
        v.witness = wit;
        return v;
      }
    }
  }
  return v;
}

NormaloidVerdict classify_normaloid(const WeightedShift& t, std::size_t horizon, const ToleranceConfig& tol) {
  if (horizon < 2) throw Error(ErrorCode::InvalidArgument, "classify_normaloid needs horizon >= 2");
  NormaloidVerdict out;
  out.verdict.order = horizon;
  const double s = t.scale();

  std::visit(overloaded{[&](const EventuallyConstant& ec) {
                          double top = ec.tail;
                          for (double h : ec.head) top = std::max(top, h);
                          out.norm = s * top;
                          // Windows of length n eventually see only the tail.
                          out.spectral_radius = s * ec.tail;
                          out.radius_exact = true;
                        },
                        [&](const BergerGenerated& bg) {
                          // Berger weights increase to sqrt(max node).
                          out.norm = s * std::sqrt(bg.measure.max_node());
                          std::vector<double> logs(2 * horizon + 1);
                          for (std::size_t k = 0; k < logs.size(); ++k) logs[k] = std::log(t.weight(k));
                          std::vector<double> prefix(logs.size() + 1, 0.0);
                          for (std::size_t k = 0; k < logs.size(); ++k) prefix[k + 1] = prefix[k] + logs[k];
                          std::vector<double> window(horizon + 1, 0.0);
                          for (std::size_t h = 1; h <= horizon; ++h) {
                            double best = -std::numeric_limits<double>::infinity();
                            for (std::size_t k = 0; k <= horizon; ++k)
                              best = std::max(best, (prefix[k + h] - prefix[k]) / static_cast<double>(h));
                            window[h] = std::exp(best);
                          }
                          double lo = window[1];
                          double hi = window[1];
                          bool increasing = true;
                          bool decreasing = true;
                          for (std::size_t h = 2; h <= horizon; ++h) {
                            lo = std::min(lo, window[h]);
                            hi = std::max(hi, window[h]);
                            increasing = increasing && window[h] >= window[h - 1];
                            decreasing = decreasing && window[h] <= window[h - 1];
                          }
                          out.window = horizon;
                          out.window_monotone = increasing || decreasing;
                          out.spectral_radius = window[horizon];
                          out.radius_exact = hi - lo <= tol.eps_eq * hi;
                        },
                        [&](const PolyThreeIsometry& poly) {
                          out.norm = s * std::sqrt(poly_sup_ratio(poly, horizon));
                          // (p(n+k)/p(k))^{1/2n} -> 1 uniformly in k.
                          out.spectral_radius = s;
                          out.radius_exact = true;
                        }},
             t.model());

  if (out.radius_exact) {
    const bool equal = std::abs(out.norm - out.spectral_radius) <= tol.eps_eq * out.norm;
    out.verdict.status = equal ? Verdict::ExactTrue : Verdict::ExactFalse;
    if (!equal) {
      Witness wit;
      wit.kind = "spectral";
      wit.value = out.norm - out.spectral_radius;
      out.verdict.witness = wit;
    }
  } else {
    out.verdict.status = Verdict::ConsistentUpTo;
  }
  return out;
}

ClassReport classify_all(const WeightedShift& t, const ClassParams& params) {
  params.validate();
  ClassReport r;
  const auto& tol = params.tol;
  r.subnormal = classify_subnormal(t, params.order, params.basis, tol);
  r.quasinormal = classify_quasinormal(t, params.order, params.basis, tol);
  r.normal = classify_normal(t, params.order, params.basis, tol);
  r.cpd = classify_cpd(t, params.order, params.basis, tol);
  r.normaloid = classify_normaloid(t, params.horizon, tol);
  r.m = params.m_isometry_order;
  r.m_isometry = classify_m_isometry(t, r.m, params.order, params.basis, tol);

  if (r.quasinormal.holds() && r.subnormal.fails())
    throw Error(ErrorCode::HierarchyViolation, "quasinormal shift reported as not subnormal");
  if (r.subnormal.holds() && r.cpd.fails())
    throw Error(ErrorCode::HierarchyViolation, "subnormal shift reported as not CPD");
  if (r.subnormal.status == Verdict::ExactTrue && r.subnormal.generic_status == Verdict::Refuted)
    throw Error(ErrorCode::HierarchyViolation, "structural and Hankel subnormality verdicts disagree");
  return r;
}

}  // namespace cpd
