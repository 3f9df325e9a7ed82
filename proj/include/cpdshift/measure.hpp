#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "cpdshift/errors.hpp"
#include "cpdshift/moments.hpp"
#include "cpdshift/tolerance.hpp"

namespace cpd {

template <typename Scalar>
struct BasicAtom {
  Scalar node{};
  Scalar mass{};
};

/// Finitely-atomic positive measure on R+. Nodes are nonnegative and strictly
/// increasing, masses strictly positive; atoms closer than the merge radius
/// are fused at their mass-weighted mean.
template <typename Scalar>
class BasicAtomicMeasure {
 public:
  using Atom = BasicAtom<Scalar>;

  BasicAtomicMeasure() = default;

  explicit BasicAtomicMeasure(std::vector<Atom> atoms, Scalar merge_radius = Scalar(1e-9)) {
    for (const auto& a : atoms) {
      if (!std::isfinite(a.node) || !std::isfinite(a.mass))
        throw Error(ErrorCode::InvalidArgument, "non-finite atom");
      if (a.node < Scalar(0)) throw Error(ErrorCode::InvalidArgument, "atom outside R+");
      if (a.mass < Scalar(0)) throw Error(ErrorCode::InvalidArgument, "negative atom mass");
    }
    std::erase_if(atoms, [](const Atom& a) { return a.mass == Scalar(0); });
    std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.node < b.node; });
    for (const auto& a : atoms) {
      if (!atoms_.empty() && a.node - atoms_.back().node <= merge_radius) {
        auto& last = atoms_.back();
        const Scalar total = last.mass + a.mass;
        last.node = (last.node * last.mass + a.node * a.mass) / total;
        last.mass = total;
      } else {
        atoms_.push_back(a);
      }
    }
  }

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  bool empty() const noexcept { return atoms_.empty(); }
  auto begin() const noexcept { return atoms_.begin(); }
  auto end() const noexcept { return atoms_.end(); }

  Scalar total_mass() const {
    Scalar s(0);
    for (const auto& a : atoms_) s += a.mass;
    return s;
  }

  Scalar max_node() const { return atoms_.empty() ? Scalar(0) : atoms_.back().node; }

 private:
  std::vector<Atom> atoms_;
};

using Atom = BasicAtom<double>;
using AtomicMeasure = BasicAtomicMeasure<double>;

/// gamma_n = sum_i mass_i node_i^n for n = 0..N, with 0^0 = 1. The empty
/// measure has the all-zero sequence.
template <typename Scalar>
BasicMomentSequence<Scalar> moments(const BasicAtomicMeasure<Scalar>& mu, std::size_t order) {
  Vec<Scalar> out = Vec<Scalar>::Zero(static_cast<Eigen::Index>(order) + 1);
  for (const auto& a : mu) {
    Scalar power(1);
    for (Eigen::Index n = 0; n < out.size(); ++n) {
      out(n) += a.mass * power;
      power *= a.node;
    }
  }
  return BasicMomentSequence<Scalar>(std::move(out));
}

/// sum_i mass_i f(node_i). A non-finite value of f at a node means f is not
/// integrable against the measure.
template <typename Scalar, typename F>
Scalar integrate(const BasicAtomicMeasure<Scalar>& mu, F&& f) {
  Scalar sum(0);
  for (const auto& a : mu) {
    const Scalar v = f(a.node);
    if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteIntegrand, "integrand not finite at a node");
    sum += a.mass * v;
  }
  return sum;
}

/// Image of the measure under x -> x^n; colliding images merge.
template <typename Scalar>
BasicAtomicMeasure<Scalar> pushforward_power(const BasicAtomicMeasure<Scalar>& mu, std::size_t n,
                                             const ToleranceConfig& tol = {}) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "pushforward power must be positive");
  std::vector<BasicAtom<Scalar>> atoms;
  atoms.reserve(mu.size());
  for (const auto& a : mu) atoms.push_back({std::pow(a.node, static_cast<Scalar>(n)), a.mass});
  return BasicAtomicMeasure<Scalar>(std::move(atoms), static_cast<Scalar>(tol.eps_node));
}

/// 1 + x + ... + x^{n-1}.
template <typename Scalar>
Scalar geometric_sum(Scalar x, std::size_t n) {
  Scalar acc(0);
  for (std::size_t j = 0; j < n; ++j) acc = acc * x + Scalar(1);
  return acc;
}

/// Density (1 + x + ... + x^{n-1})^2 against the measure.
template <typename Scalar>
BasicAtomicMeasure<Scalar> reweight_geometric_square(const BasicAtomicMeasure<Scalar>& mu, std::size_t n,
                                                     const ToleranceConfig& tol = {}) {
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "reweight power must be positive");
  std::vector<BasicAtom<Scalar>> atoms;
  for (const auto& a : mu) {
    const Scalar g = geometric_sum(a.node, n);
    atoms.push_back({a.node, a.mass * g * g});
  }
  return BasicAtomicMeasure<Scalar>(std::move(atoms), static_cast<Scalar>(tol.eps_node));
}

/// Mass of the atom within eps_node of x0, or zero.
template <typename Scalar>
Scalar atom_at(const BasicAtomicMeasure<Scalar>& mu, Scalar x0, const ToleranceConfig& tol = {}) {
  const auto radius = static_cast<Scalar>(tol.eps_node);
  Scalar found(0);
  int hits = 0;
  for (const auto& a : mu) {
    if (std::abs(a.node - x0) <= radius) {
      found = a.mass;
      ++hits;
    }
  }
  if (hits > 1) throw Error(ErrorCode::AmbiguousAtom, "several atoms within eps_node of the point");
  return found;
}

template <typename Scalar>
BasicAtomicMeasure<Scalar> remove_atom(const BasicAtomicMeasure<Scalar>& mu, Scalar x0,
                                       const ToleranceConfig& tol = {}) {
  const auto radius = static_cast<Scalar>(tol.eps_node);
  std::vector<BasicAtom<Scalar>> kept;
  for (const auto& a : mu)
    if (std::abs(a.node - x0) > radius) kept.push_back(a);
  return BasicAtomicMeasure<Scalar>(std::move(kept), radius);
}

namespace detail {

// Power of two closest to gamma_N / gamma_{N-1}, the running estimate of the
// largest node. Dividing gamma_n by rho^n is then exact.
template <typename Scalar>
Scalar node_scale(const Vec<Scalar>& g) {
  const Eigen::Index n = g.size() - 1;
  if (n < 1 || !(g(n) > Scalar(0)) || !(g(n - 1) > Scalar(0))) return Scalar(1);
  const Scalar ratio = g(n) / g(n - 1);
  if (!std::isfinite(ratio) || !(ratio > Scalar(0))) return Scalar(1);
  int e = static_cast<int>(std::lround(std::log2(ratio)));
  const int limit = std::max(1, 900 / static_cast<int>(n));
  e = std::clamp(e, -limit, limit);
  return std::ldexp(Scalar(1), e);
}

// Max over n of |g_n - sum_i m_i x_i^n| * w_n.
template <typename Scalar>
Scalar moment_residual(const Vec<Scalar>& g, const Vec<Scalar>& w, const Vec<Scalar>& nodes,
                       const Vec<Scalar>& masses, Vec<Scalar>* out = nullptr) {
  Vec<Scalar> res(g.size());
  for (Eigen::Index n = 0; n < g.size(); ++n) {
    Scalar model(0);
    for (Eigen::Index i = 0; i < nodes.size(); ++i) model += masses(i) * std::pow(nodes(i), Scalar(n));
    res(n) = (g(n) - model) * w(n);
  }
  if (out) *out = res;
  return res.size() ? res.cwiseAbs().maxCoeff() : Scalar(0);
}

// Weighted Gauss-Newton refinement of (nodes, masses) against every moment;
// nodes flagged in `frozen` stay put. Steps are kept only while they reduce
// the max weighted residual, which is returned.
template <typename Scalar>
Scalar polish_atoms(const Vec<Scalar>& g, const Vec<Scalar>& w, Vec<Scalar>& nodes, Vec<Scalar>& masses,
                    const std::vector<bool>& frozen = {}, int iterations = 8) {
  const Eigen::Index r = nodes.size();
  std::vector<Eigen::Index> free_nodes;
  for (Eigen::Index i = 0; i < r; ++i)
    if (frozen.empty() || !frozen[static_cast<std::size_t>(i)]) free_nodes.push_back(i);
  const auto cols = r + static_cast<Eigen::Index>(free_nodes.size());

  Vec<Scalar> res;
  Scalar best = moment_residual<Scalar>(g, w, nodes, masses, &res);
  for (int it = 0; it < iterations && best > Scalar(0); ++it) {
    Mat<Scalar> jac(g.size(), cols);
    for (Eigen::Index i = 0; i < r; ++i) {
      Scalar p(1);
      for (Eigen::Index n = 0; n < g.size(); ++n) {
        jac(n, i) = p * w(n);
        p *= nodes(i);
      }
    }
    for (std::size_t k = 0; k < free_nodes.size(); ++k) {
      const Eigen::Index i = free_nodes[k];
      Scalar p(1);
      Scalar dp(0);
      for (Eigen::Index n = 0; n < g.size(); ++n) {
        jac(n, r + static_cast<Eigen::Index>(k)) = masses(i) * dp * w(n);
        dp = dp * nodes(i) + p;
        p *= nodes(i);
      }
    }
    const Vec<Scalar> step = jac.colPivHouseholderQr().solve(res);
    Vec<Scalar> trial_masses = masses + step.head(r);
    Vec<Scalar> trial_nodes = nodes;
    for (std::size_t k = 0; k < free_nodes.size(); ++k)
      trial_nodes(free_nodes[k]) += step(r + static_cast<Eigen::Index>(k));
    Vec<Scalar> trial_res;
    const Scalar trial = moment_residual<Scalar>(g, w, trial_nodes, trial_masses, &trial_res);
    if (!(trial < best)) break;
    best = trial;
    nodes = std::move(trial_nodes);
    masses = std::move(trial_masses);
    res = std::move(trial_res);
  }
  return best;
}

// Order-r quadrature fit: Golub-Welsch nodes from H_r = L L^T and its shift,
// Vandermonde masses on g_0..g_{2r-1}. False when H_r is not positive definite.
template <typename Scalar>
bool quadrature_fit(const Vec<Scalar>& g, std::size_t r, Vec<Scalar>& nodes, Vec<Scalar>& masses) {
  using M = Mat<Scalar>;
  const M hr = hankel_of<Scalar>(g, 0, r);
  const M h1 = hankel_of<Scalar>(g, 1, r);
  Eigen::LLT<M> llt(hr);
  if (llt.info() != Eigen::Success) return false;
  const M l = llt.matrixL();
  M tmp = l.template triangularView<Eigen::Lower>().solve(h1);
  M jac = l.template triangularView<Eigen::Lower>().solve(tmp.transpose()).transpose();
  jac = Scalar(0.5) * (jac + jac.transpose());
  Eigen::SelfAdjointEigenSolver<M> jes(jac, Eigen::EigenvaluesOnly);
  if (jes.info() != Eigen::Success) return false;
  nodes = jes.eigenvalues();
  const auto rows = static_cast<Eigen::Index>(2 * r);
  M vander(rows, static_cast<Eigen::Index>(r));
  for (Eigen::Index i = 0; i < vander.cols(); ++i) {
    Scalar p(1);
    for (Eigen::Index n = 0; n < rows; ++n) {
      vander(n, i) = p;
      p *= nodes(i);
    }
  }
  masses = vander.colPivHouseholderQr().solve(g.head(rows));
  return nodes.allFinite() && masses.allFinite();
}

}  // namespace detail

/// Recovers the finitely-atomic measure with the given moments.
///
/// The sequence is first rescaled by a power of two so that its largest node
/// sits near one. The starting rank r is the count of eigenvalues of the
/// largest feasible Hankel section above eps_psd times its scale. For each
/// candidate r, nodes are the eigenvalues of the order-r Jacobi matrix
/// L^{-1} H^{(1)} L^{-T}, where H = L L^T is the order-r Hankel section and
/// H^{(1)} its shift, and masses solve the Vandermonde system on
/// gamma_0..gamma_{2r-1}; a weighted Gauss-Newton pass then refits both
/// against every moment. Ranks grow from there while 2r+1 <= N; fits whose
/// worst per-moment relative residual exceeds eps_eq, or that put nodes or
/// mass below zero (beyond eps_psd after rescaling), are discarded. The smallest surviving rank whose residual is within
/// a factor 1e3 of the best one (or at the rounding floor) is returned, so the
/// rank only grows when the eigenvalue threshold hides atoms that the moments
/// still resolve.
///
/// `reference`, when given, holds per-index magnitudes that bound the
/// rounding noise in `seq` (see second_difference_scale); it enters both the
/// rank threshold and the residual weights.
///
/// A recovered node within sqrt(eps_eq) * max(1, a) of an anchor a is pinned
/// to a exactly when the refit residual stays within 10x of the free fit;
/// otherwise the free fit is kept.
template <typename Scalar>
BasicAtomicMeasure<Scalar> recover_measure(const BasicMomentSequence<Scalar>& seq, const ToleranceConfig& tol,
                                           const Vec<Scalar>* reference = nullptr,
                                           const std::vector<Scalar>& anchors = {}) {
  using M = Mat<Scalar>;
  using V = Vec<Scalar>;
  if (reference && reference->size() != seq.values().size())
    throw Error(ErrorCode::InvalidArgument, "reference scale length mismatch");
  if (seq.order() < 3) throw Error(ErrorCode::OrderTooSmall, "recover_measure needs N >= 3");

  const auto eps_psd = static_cast<Scalar>(tol.eps_psd);
  const auto eps_eq = static_cast<Scalar>(tol.eps_eq);
  if (detail::stieltjes_test<Scalar>(seq.values(), tol, reference).refuted())
    throw Error(ErrorCode::NotAMeasure, "sequence is not a Stieltjes moment sequence");

  const Scalar rho = detail::node_scale<Scalar>(seq.values());
  V g = seq.values();
  V ref = reference ? *reference : V::Zero(g.size());
  {
    Scalar p(1);
    for (Eigen::Index n = 0; n < g.size(); ++n) {
      g(n) /= p;
      ref(n) = std::abs(ref(n)) / p;
      p *= rho;
    }
  }

  const std::size_t order = seq.order();
  const std::size_t m = order / 2 + 1;
  const M h = detail::hankel_of<Scalar>(g, 0, m);
  Eigen::SelfAdjointEigenSolver<M> es(h, Eigen::EigenvaluesOnly);
  const Scalar scale = std::max(es.eigenvalues().cwiseAbs().maxCoeff(),
                                ref.head(static_cast<Eigen::Index>(2 * m - 1)).maxCoeff());
  const Scalar rank_threshold = eps_psd * scale;
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    if (es.eigenvalues()(i) > rank_threshold) ++rank;
  if (2 * rank + 1 > order)
    throw Error(ErrorCode::RankDeficiencyUnstable, "too few moments for the numerical rank");

  // Residual weights: each moment is matched relative to its own magnitude
  // plus its noise bound, with a floor at the rounding level of the largest.
  V size_n = g.cwiseAbs() + ref;
  const Scalar floor = std::numeric_limits<Scalar>::epsilon() * size_n.maxCoeff();
  V w(g.size());
  for (Eigen::Index n = 0; n < g.size(); ++n) w(n) = Scalar(1) / std::max(size_n(n) + floor, std::numeric_limits<Scalar>::min());
  const Scalar mass_floor = eps_psd * std::max(std::abs(g(0)), ref(0));

  // Fits at or below the rounding floor end the search; otherwise the
  // smallest rank within a factor 1e3 of the best fit wins.
  const Scalar fit_floor = Scalar(1e4) * std::numeric_limits<Scalar>::epsilon();
  struct Candidate {
    V nodes;
    V masses;
    Scalar residual;
  };
  std::vector<Candidate> candidates;
  for (std::size_t r = rank; 2 * r + 1 <= order; ++r) {
    if (r == 0) {
      const Scalar residual = g.cwiseAbs().cwiseProduct(w).maxCoeff();
      if (residual <= eps_eq) candidates.push_back({V(), V(), residual});
      if (residual <= fit_floor) break;
      continue;
    }
    V nodes;
    V masses;
    Scalar residual = std::numeric_limits<Scalar>::infinity();
    if (detail::quadrature_fit<Scalar>(g, r, nodes, masses))
      residual = detail::polish_atoms<Scalar>(g, w, nodes, masses);
    if (!std::isfinite(residual)) continue;
    for (const Scalar anchor : anchors) {
      const Scalar snap = std::sqrt(eps_eq) * std::max(Scalar(1), anchor);
      Eigen::Index nearest = 0;
      (nodes * rho - V::Constant(nodes.size(), anchor)).cwiseAbs().minCoeff(&nearest);
      const Scalar distance = std::abs(nodes(nearest) * rho - anchor);
      if (distance == Scalar(0) || distance > snap) continue;
      V pinned_nodes = nodes;
      V pinned_masses = masses;
      pinned_nodes(nearest) = anchor / rho;
      std::vector<bool> frozen(static_cast<std::size_t>(nodes.size()), false);
      frozen[static_cast<std::size_t>(nearest)] = true;
      const Scalar pinned = detail::polish_atoms<Scalar>(g, w, pinned_nodes, pinned_masses, frozen);
      if (pinned <= std::max(Scalar(10) * residual, fit_floor)) {
        nodes = std::move(pinned_nodes);
        masses = std::move(pinned_masses);
        residual = pinned;
      }
    }
    if (!(residual <= eps_eq)) continue;
    if (nodes.minCoeff() < -eps_psd || masses.minCoeff() < -mass_floor) continue;
    candidates.push_back({std::move(nodes), std::move(masses), residual});
    if (residual <= fit_floor) break;
  }
  if (candidates.empty())
    throw Error(ErrorCode::RankDeficiencyUnstable, "no atomic fit matches the moments to eps_eq");

  Scalar best = candidates.front().residual;
  for (const auto& c : candidates) best = std::min(best, c.residual);
  const auto chosen = std::find_if(candidates.begin(), candidates.end(), [&](const Candidate& c) {
    return c.residual <= std::max(Scalar(1e3) * best, fit_floor);
  });
  std::vector<BasicAtom<Scalar>> atoms;
  for (Eigen::Index i = 0; i < chosen->nodes.size(); ++i)
    if (chosen->masses(i) >= mass_floor)
      atoms.push_back({std::max(Scalar(0), chosen->nodes(i) * rho), chosen->masses(i)});
  return BasicAtomicMeasure<Scalar>(std::move(atoms), static_cast<Scalar>(tol.eps_node));
}

}  // namespace cpd
