#include "cpdshift/triplet.hpp"

#include <cmath>
#include <vector>

namespace cpd {

ScalarTriplet make_triplet(double b, double c, AtomicMeasure F, const ToleranceConfig& tol) {
  if (!std::isfinite(b) || !std::isfinite(c)) throw Error(ErrorCode::InvalidArgument, "non-finite triplet entry");
  if (c < -tol.eps_eq) throw Error(ErrorCode::InvalidArgument, "triplet c must be nonnegative");
  if (atom_at(F, 1.0, tol) != 0.0) throw Error(ErrorCode::InvalidArgument, "F must not charge the point 1");
  return ScalarTriplet{b, std::max(c, 0.0), std::move(F)};
}

namespace {

// `magnitude` bounds each gamma_n's rounding noise from above (up to eps).
ScalarTriplet recover_scaled(const MomentSequence& seq, const MomentSequence& magnitude, const ToleranceConfig& tol) {
  if (seq.order() < 5) throw Error(ErrorCode::OrderTooSmall, "recover_triplet needs N >= 5");
  if (std::abs(seq[0] - 1.0) > tol.eps_eq)
    throw Error(ErrorCode::InvalidArgument, "recover_triplet needs gamma_0 = 1");
  const auto beta = second_difference(seq);
  const Vec<double> scale = second_difference_scale(magnitude);
  if (detail::stieltjes_test<double>(beta.values(), tol, &scale).refuted())
    throw Error(ErrorCode::NotCPD, "orbit sequence is not CPD");
  const AtomicMeasure m = recover_measure(beta, tol, &scale, {1.0});
  const double c = atom_at(m, 1.0, tol) / 2.0;
  return ScalarTriplet{seq[1] - seq[0] - c, c, remove_atom(m, 1.0, tol)};
}

// Sum of the absolute terms that reconstruct_moments adds up.
MomentSequence reconstruction_magnitude(const ScalarTriplet& t, std::size_t order, const ToleranceConfig& tol) {
  std::vector<double> out(order + 1);
  for (std::size_t n = 0; n <= order; ++n) {
    const double nn = static_cast<double>(n);
    double acc = 1.0 + nn * std::abs(t.b) + nn * nn * t.c;
    for (const auto& a : t.F) acc += q_poly(n, a.node, tol) * a.mass;
    out[n] = acc;
  }
  return MomentSequence(out);
}

}  // namespace

ScalarTriplet recover_triplet(const MomentSequence& seq, const ToleranceConfig& tol) {
  return recover_scaled(seq, seq, tol);
}

MomentSequence reconstruct_moments(const ScalarTriplet& t, std::size_t order, const ToleranceConfig& tol) {
  std::vector<double> out(order + 1);
  for (std::size_t n = 0; n <= order; ++n) {
    const double nn = static_cast<double>(n);
    double acc = 1.0 + nn * t.b + nn * nn * t.c;
    for (const auto& a : t.F) acc += q_poly(n, a.node, tol) * a.mass;
    out[n] = acc;
  }
  return MomentSequence(out);
}

SubnormalityCertificate subnormality_certificate(const ScalarTriplet& t, const ToleranceConfig& tol) {
  SubnormalityCertificate cert;
  cert.mass_integral = integrate(t.F, [](double x) { return 1.0 / ((x - 1.0) * (x - 1.0)); });
  cert.mass_ok = cert.mass_integral <= 1.0 + tol.eps_eq;
  cert.b_integral = integrate(t.F, [](double x) { return 1.0 / (x - 1.0); });
  cert.b_residual = std::abs(t.b - cert.b_integral);
  cert.b_ok = cert.b_residual <= tol.eps_eq * std::max(1.0, std::abs(t.b));
  cert.c_value = t.c;
  cert.c_ok = std::abs(t.c) <= tol.eps_eq;
  cert.passed = cert.mass_ok && cert.b_ok && cert.c_ok;
  if (!cert.mass_ok)
    cert.first_failure = "a";
  else if (!cert.b_ok)
    cert.first_failure = "b";
  else if (!cert.c_ok)
    cert.first_failure = "c";
  return cert;
}

AtomicMeasure berger_measure(const ScalarTriplet& t, const ToleranceConfig& tol) {
  const auto cert = subnormality_certificate(t, tol);
  if (!cert.passed)
    throw Error(ErrorCode::CertificateFailed, "subnormality certificate fails at (" + cert.first_failure + ")");
  std::vector<Atom> atoms;
  double total = 0.0;
  for (const auto& a : t.F) {
    const double w = a.mass / ((a.node - 1.0) * (a.node - 1.0));
    atoms.push_back({a.node, w});
    total += w;
  }
  const double defect = 1.0 - total;
  if (defect > tol.eps_eq) atoms.push_back({1.0, defect});
  return AtomicMeasure(std::move(atoms), tol.eps_node);
}

bool shift_quasinormal_certificate(const ScalarTriplet& t, const ToleranceConfig& tol) {
  if (!subnormality_certificate(t, tol).passed) return false;
  return berger_measure(t, tol).size() == 1;
}

AtomicMeasure power_transform(const ScalarTriplet& t, std::size_t n, const ToleranceConfig& tol) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "power must be positive");
  std::vector<Atom> atoms(t.F.begin(), t.F.end());
  if (t.c > 0.0) atoms.push_back({1.0, 2.0 * t.c});
  const AtomicMeasure m(std::move(atoms), tol.eps_node);
  return pushforward_power(reweight_geometric_square(m, n, tol), n, tol);
}

double b_n_identity_check(const ScalarTriplet& t, std::size_t n, const ToleranceConfig& tol, std::size_t order) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "power must be positive");
  const auto cert = subnormality_certificate(t, tol);
  if (!cert.passed)
    throw Error(ErrorCode::CertificateFailed, "subnormality certificate fails at (" + cert.first_failure + ")");
  if (order == 0) order = 2 * (t.F.size() + 1) + 4;
  const auto full = reconstruct_moments(t, n * order, tol);
  const auto strided =
      recover_scaled(full.stride(n), reconstruction_magnitude(t, n * order, tol).stride(n), tol);
  const double nn = static_cast<double>(n);
  const double direct = integrate(t.F, [nn](double x) {
    const double d = x - 1.0;
    return std::expm1(nn * std::log1p(d)) / (d * d);
  });
  return std::abs(strided.b - direct);
}

}  // namespace cpd
