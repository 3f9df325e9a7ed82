#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <optional>
#include <vector>

#include "cpdshift/errors.hpp"
#include "cpdshift/tolerance.hpp"

namespace cpd {

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Finite truncation gamma_0..gamma_N of a real sequence. Entries are finite
/// and the sequence is never empty; order() is N.
template <typename Scalar>
class BasicMomentSequence {
 public:
  using Vector = Vec<Scalar>;

  explicit BasicMomentSequence(Vector values) : values_(std::move(values)) { validate(); }

  explicit BasicMomentSequence(const std::vector<Scalar>& values)
      : values_(Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()))) {
    validate();
  }

  BasicMomentSequence(std::initializer_list<Scalar> values)
      : BasicMomentSequence(std::vector<Scalar>(values)) {}

  std::size_t order() const noexcept { return static_cast<std::size_t>(values_.size()) - 1; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.size()); }
  Scalar operator[](std::size_t n) const { return values_(static_cast<Eigen::Index>(n)); }
  const Vector& values() const noexcept { return values_; }

  std::vector<Scalar> to_vector() const { return {values_.data(), values_.data() + values_.size()}; }

  /// {gamma_{n+by}}: drops the first `by` entries.
  BasicMomentSequence shifted(std::size_t by) const {
    if (by > order()) throw Error(ErrorCode::OrderTooSmall, "shift exceeds sequence order");
    return BasicMomentSequence(Vector(values_.tail(values_.size() - static_cast<Eigen::Index>(by))));
  }

  /// {gamma_{start + k*step}} for every index that fits.
  BasicMomentSequence stride(std::size_t step, std::size_t start = 0) const {
    if (step == 0 || start > order()) throw Error(ErrorCode::InvalidArgument, "bad stride");
    std::vector<Scalar> out;
    for (std::size_t n = start; n <= order(); n += step) out.push_back((*this)[n]);
    return BasicMomentSequence(out);
  }

  /// {ratio^n gamma_n}: the moments of the measure dilated by `ratio`.
  BasicMomentSequence geometric_scaled(Scalar ratio) const {
    Vector out = values_;
    Scalar power(1);
    for (Eigen::Index n = 0; n < out.size(); ++n) {
      out(n) *= power;
      power *= ratio;
    }
    return BasicMomentSequence(std::move(out));
  }

  friend bool operator==(const BasicMomentSequence& a, const BasicMomentSequence& b) {
    return a.values_.size() == b.values_.size() && a.values_ == b.values_;
  }

 private:
  void validate() const {
    if (values_.size() == 0) throw Error(ErrorCode::InvalidArgument, "empty moment sequence");
    if (!values_.allFinite()) throw Error(ErrorCode::InvalidArgument, "non-finite moment");
  }

  Vector values_;
};

using MomentSequence = BasicMomentSequence<double>;

/// Negative direction of a Hankel section: coefficients (unit norm) and the
/// attained quadratic form.
template <typename Scalar>
struct HankelWitness {
  Vec<Scalar> coefficients;
  Scalar form_value{};
  std::size_t offset = 0;
  std::size_t size = 0;
};

enum class Positivity { Refuted, ConsistentUpTo };

template <typename Scalar>
struct BasicPositivityVerdict {
  Positivity status = Positivity::ConsistentUpTo;
  /// Largest Hankel section size that was examined.
  std::size_t order_checked = 0;
  std::optional<HankelWitness<Scalar>> witness;

  bool refuted() const noexcept { return status == Positivity::Refuted; }
};

using PositivityVerdict = BasicPositivityVerdict<double>;

namespace detail {

template <typename Scalar>
Mat<Scalar> hankel_of(const Vec<Scalar>& values, std::size_t offset, std::size_t size) {
  Mat<Scalar> h(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(size));
  for (Eigen::Index i = 0; i < h.rows(); ++i)
    for (Eigen::Index j = 0; j < h.cols(); ++j)
      h(i, j) = values(i + j + static_cast<Eigen::Index>(offset));
  return h;
}

// Scans hankel sections of increasing size at `offset`. A section fails when
// its smallest eigenvalue lies below -eps_psd * scale, where scale is the
// section's max-abs entry, raised to the matching window of `reference` when
// one is given. Returns the witness of the smallest failing section.
template <typename Scalar>
std::optional<HankelWitness<Scalar>> first_negative_section(const Vec<Scalar>& values,
                                                            std::size_t offset, Scalar eps_psd,
                                                            const Vec<Scalar>* reference,
                                                            std::size_t* sizes_checked = nullptr) {
  const auto n_order = static_cast<std::size_t>(values.size()) - 1;
  if (offset > n_order) {
    if (sizes_checked) *sizes_checked = 0;
    return std::nullopt;
  }
  const std::size_t max_size = (n_order - offset) / 2 + 1;
  if (sizes_checked) *sizes_checked = max_size;

  for (std::size_t m = 1; m <= max_size; ++m) {
    const Mat<Scalar> h = hankel_of(values, offset, m);
    Scalar scale = h.cwiseAbs().maxCoeff();
    if (reference) {
      const auto window = reference->segment(static_cast<Eigen::Index>(offset),
                                             static_cast<Eigen::Index>(2 * m - 1));
      scale = std::max(scale, window.cwiseAbs().maxCoeff());
    }
    const Scalar threshold = eps_psd * scale;

    // Cholesky of H + threshold*I succeeds exactly when no eigenvalue sits
    // below -threshold (up to rounding far smaller than threshold).
    const Mat<Scalar> lifted = h + threshold * Mat<Scalar>::Identity(h.rows(), h.cols());
    if (threshold > Scalar(0) && Eigen::LLT<Mat<Scalar>>(lifted).info() == Eigen::Success) continue;

    Eigen::SelfAdjointEigenSolver<Mat<Scalar>> es(h);
    if (es.info() != Eigen::Success) continue;
    if (es.eigenvalues()(0) < -threshold) {
      HankelWitness<Scalar> w;
      w.coefficients = es.eigenvectors().col(0);
      w.form_value = w.coefficients.dot(h * w.coefficients);
      w.offset = offset;
      w.size = m;
      return w;
    }
  }
  return std::nullopt;
}

template <typename Scalar>
BasicPositivityVerdict<Scalar> stieltjes_test(const Vec<Scalar>& values, const ToleranceConfig& tol,
                                              const Vec<Scalar>* reference) {
  BasicPositivityVerdict<Scalar> verdict;
  std::size_t checked0 = 0;
  std::size_t checked1 = 0;
  const auto eps = static_cast<Scalar>(tol.eps_psd);
  auto w = first_negative_section<Scalar>(values, 0, eps, reference, &checked0);
  if (!w) w = first_negative_section<Scalar>(values, 1, eps, reference, &checked1);
  verdict.order_checked = std::max(checked0, checked1);
  if (w) {
    verdict.status = Positivity::Refuted;
    verdict.witness = std::move(w);
  }
  return verdict;
}

}  // namespace detail

/// H[i][j] = gamma_{i+j+offset}, size x size.
template <typename Scalar>
Mat<Scalar> hankel(const BasicMomentSequence<Scalar>& seq, std::size_t offset, std::size_t size) {
  if (size == 0) throw Error(ErrorCode::InvalidArgument, "hankel size must be positive");
  if (offset + 2 * (size - 1) > seq.order())
    throw Error(ErrorCode::IndexOverflow, "hankel section needs moments beyond the truncation");
  return detail::hankel_of(seq.values(), offset, size);
}

/// Positive-definiteness test over every feasible Hankel section.
template <typename Scalar>
BasicPositivityVerdict<Scalar> is_pd(const BasicMomentSequence<Scalar>& seq, const ToleranceConfig& tol) {
  if (seq.order() < 2) throw Error(ErrorCode::OrderTooSmall, "is_pd needs N >= 2");
  BasicPositivityVerdict<Scalar> verdict;
  auto w = detail::first_negative_section<Scalar>(seq.values(), 0, static_cast<Scalar>(tol.eps_psd),
                                                  nullptr, &verdict.order_checked);
  if (w) {
    verdict.status = Positivity::Refuted;
    verdict.witness = std::move(w);
  }
  return verdict;
}

/// Stieltjes test: the sequence and its shift by one are both PD. The
/// unshifted sections are examined first; the witness carries its offset.
template <typename Scalar>
BasicPositivityVerdict<Scalar> is_stieltjes(const BasicMomentSequence<Scalar>& seq,
                                            const ToleranceConfig& tol) {
  if (seq.order() < 3) throw Error(ErrorCode::OrderTooSmall, "is_stieltjes needs N >= 3");
  return detail::stieltjes_test<Scalar>(seq.values(), tol, nullptr);
}

/// (Delta^m gamma)_n = sum_k (-1)^{m-k} C(m,k) gamma_{n+k}, by repeated differencing.
template <typename Scalar>
BasicMomentSequence<Scalar> finite_difference(const BasicMomentSequence<Scalar>& seq, std::size_t m) {
  if (m == 0) throw Error(ErrorCode::InvalidArgument, "difference order must be positive");
  if (seq.order() < m) throw Error(ErrorCode::OrderTooSmall, "finite_difference needs N >= m");
  Vec<Scalar> v = seq.values();
  for (std::size_t pass = 0; pass < m; ++pass) {
    const Eigen::Index len = v.size() - 1;
    Vec<Scalar> next(len);
    for (Eigen::Index n = 0; n < len; ++n) next(n) = v(n + 1) - v(n);
    v = std::move(next);
  }
  return BasicMomentSequence<Scalar>(std::move(v));
}

/// beta_n = gamma_{n+2} - 2 gamma_{n+1} + gamma_n.
template <typename Scalar>
BasicMomentSequence<Scalar> second_difference(const BasicMomentSequence<Scalar>& seq) {
  if (seq.order() < 2) throw Error(ErrorCode::OrderTooSmall, "second_difference needs N >= 2");
  Vec<Scalar> beta(seq.size() - 2);
  for (Eigen::Index n = 0; n < beta.size(); ++n) {
    const auto i = static_cast<std::size_t>(n);
    beta(n) = seq[i + 2] - Scalar(2) * seq[i + 1] + seq[i];
  }
  return BasicMomentSequence<Scalar>(std::move(beta));
}

/// Magnitudes |gamma_n| + 2|gamma_{n+1}| + |gamma_{n+2}| aligned with the
/// second difference; sets the noise scale of anything derived from beta.
template <typename Scalar>
Vec<Scalar> second_difference_scale(const BasicMomentSequence<Scalar>& seq) {
  Vec<Scalar> out(static_cast<Eigen::Index>(seq.size()) - 2);
  for (Eigen::Index n = 0; n < out.size(); ++n) {
    const auto i = static_cast<std::size_t>(n);
    out(n) = std::abs(seq[i]) + Scalar(2) * std::abs(seq[i + 1]) + std::abs(seq[i + 2]);
  }
  return out;
}

/// Maps coordinates mu in the difference basis d_i = e_i - e_{i+1} to plain
/// coefficients lambda (which then sum to zero).
template <typename Scalar>
Vec<Scalar> from_difference_basis(const Vec<Scalar>& mu) {
  Vec<Scalar> lambda = Vec<Scalar>::Zero(mu.size() + 1);
  for (Eigen::Index i = 0; i < mu.size(); ++i) {
    lambda(i) += mu(i);
    lambda(i + 1) -= mu(i);
  }
  return lambda;
}

/// Conditional positive definiteness: the Stieltjes test applied to the
/// second differences. Section scales are measured against gamma itself, so
/// rounding noise in beta is never mistaken for a negative direction.
template <typename Scalar>
BasicPositivityVerdict<Scalar> is_cpd(const BasicMomentSequence<Scalar>& seq, const ToleranceConfig& tol) {
  if (seq.order() < 4) throw Error(ErrorCode::OrderTooSmall, "is_cpd needs N >= 4");
  const auto beta = second_difference(seq);
  const Vec<Scalar> scale = second_difference_scale(seq);
  return detail::stieltjes_test<Scalar>(beta.values(), tol, &scale);
}

/// Q_n(x) = sum_{j=0}^{n-2} (n-j-1) x^j = (x^n - 1 - n(x-1)) / (x-1)^2.
/// Inside the band around x = 1 the sum form is used; elsewhere the closed
/// form, with x^n - 1 evaluated as expm1(n log1p(x-1)).
template <typename Scalar>
Scalar q_poly(std::size_t n, Scalar x, Scalar singular_band = Scalar(1e-4)) {
  if (n <= 1) return Scalar(0);
  const Scalar d = x - Scalar(1);
  if (std::abs(d) < singular_band) {
    Scalar acc(0);
    for (std::size_t j = n - 1; j-- > 0;) acc = acc * x + static_cast<Scalar>(n - j - 1);
    return acc;
  }
  const auto nn = static_cast<Scalar>(n);
  const Scalar power_minus_one = std::expm1(nn * std::log1p(d));
  return (power_minus_one - nn * d) / (d * d);
}

template <typename Scalar>
Scalar q_poly(std::size_t n, Scalar x, const ToleranceConfig& tol) {
  return q_poly<Scalar>(n, x, static_cast<Scalar>(tol.singular_band));
}

}  // namespace cpd
