#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cpdshift/measure.hpp"
#include "cpdshift/moments.hpp"

using namespace cpd;

namespace {

MomentSequence seq(std::vector<double> v) { return MomentSequence(std::move(v)); }

MomentSequence geometric(double base, std::size_t order) {
  std::vector<double> v(order + 1);
  for (std::size_t n = 0; n <= order; ++n) v[n] = std::pow(base, static_cast<double>(n));
  return seq(v);
}

// Closed form written out independently of the library.
double q_closed(std::size_t n, double x) {
  const double nn = static_cast<double>(n);
  return (std::pow(x, nn) - 1.0 - nn * (x - 1.0)) / ((x - 1.0) * (x - 1.0));
}

double q_sum(std::size_t n, double x) {
  double acc = 0.0;
  for (std::size_t j = 0; j + 2 <= n; ++j) acc += static_cast<double>(n - j - 1) * std::pow(x, static_cast<double>(j));
  return acc;
}

}  // namespace

TEST(Hankel, ConstantSequenceGivesAllOnes) {
  const Mat<double> h = hankel(seq({1, 1, 1, 1, 1}), 0, 3);
  EXPECT_EQ(h, Mat<double>::Ones(3, 3));
}

TEST(Hankel, OffsetOneOfPowersOfTwo) {
  Mat<double> expected(2, 2);
  expected << 2, 4, 4, 8;
  EXPECT_EQ(hankel(geometric(2.0, 4), 1, 2), expected);
}

TEST(Hankel, DirectIndexing) {
  Mat<double> expected(2, 2);
  expected << 1, 2, 2, 1;
  EXPECT_EQ(hankel(seq({1, 2, 1, 2, 1}), 0, 2), expected);
}

TEST(Hankel, OverflowThrows) {
  try {
    (void)hankel(seq({1, 2, 3}), 1, 2);
    FAIL() << "expected IndexOverflow";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IndexOverflow);
  }
}

TEST(Hankel, ExactlySymmetric) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5, 5);
  std::vector<double> v(21);
  for (auto& x : v) x = u(rng);
  const auto s = seq(v);
  for (std::size_t off = 0; off <= 4; ++off)
    for (std::size_t m = 1; off + 2 * (m - 1) <= 20; ++m) {
      const Mat<double> h = hankel(s, off, m);
      EXPECT_EQ(h, h.transpose());
    }
}

TEST(IsPd, PointMassAtTwo) {
  const auto v = is_pd(geometric(2.0, 8), {});
  EXPECT_FALSE(v.refuted());
  EXPECT_EQ(v.order_checked, 5u);
}

TEST(IsPd, AlternatingBlockRefuted) {
  const auto v = is_pd(seq({1, 2, 1, 2, 1}), {});
  ASSERT_TRUE(v.refuted());
  ASSERT_TRUE(v.witness.has_value());
  EXPECT_EQ(v.witness->size, 2u);
  EXPECT_LT(v.witness->form_value, 0.0);
  // The witness is a genuine negative direction of the section it names.
  const Mat<double> h = hankel(seq({1, 2, 1, 2, 1}), v.witness->offset, v.witness->size);
  const auto& c = v.witness->coefficients;
  EXPECT_NEAR(c.dot(h * c), v.witness->form_value, 1e-12);
}

TEST(IsPd, AllOnes) { EXPECT_FALSE(is_pd(seq(std::vector<double>(9, 1.0)), {}).refuted()); }

TEST(IsStieltjes, TwoAtomMeasure) {
  const AtomicMeasure mu({{1.0, 0.5}, {3.0, 0.5}});
  EXPECT_FALSE(is_stieltjes(moments(mu, 8), {}).refuted());
}

TEST(IsStieltjes, AlternatingSignsRefutedAtOffsetOne) {
  const auto v = is_stieltjes(seq({1, -1, 1, -1, 1, -1, 1}), {});
  ASSERT_TRUE(v.refuted());
  EXPECT_EQ(v.witness->offset, 1u);
}

TEST(IsStieltjes, AllOnes) { EXPECT_FALSE(is_stieltjes(seq(std::vector<double>(9, 1.0)), {}).refuted()); }

TEST(SecondDifference, AffineVanishes) {
  const auto b = second_difference(seq({0, 1, 2, 3, 4, 5}));
  EXPECT_EQ(b.order(), 3u);
  for (std::size_t n = 0; n < b.size(); ++n) EXPECT_EQ(b[n], 0.0);
}

TEST(SecondDifference, PowersOfFour) {
  const auto b = second_difference(geometric(4.0, 10));
  for (std::size_t n = 0; n < b.size(); ++n) EXPECT_NEAR(b[n], 9.0 * std::pow(4.0, n), 1e-12 * b[n]);
}

TEST(SecondDifference, QuadraticGivesConstantOne) {
  const auto b = second_difference(seq({1, 1.8, 3.6, 6.4}));
  ASSERT_EQ(b.size(), 2u);
  EXPECT_NEAR(b[0], 1.0, 1e-14);
  EXPECT_NEAR(b[1], 1.0, 1e-14);
}

TEST(SecondDifference, TooShortThrows) {
  try {
    (void)second_difference(seq({1, 2}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OrderTooSmall);
  }
}

TEST(IsCpd, QuadraticIsConsistent) {
  std::vector<double> v;
  for (int n = 0; n <= 12; ++n) v.push_back(1 + 0.3 * n + 0.5 * n * n);
  EXPECT_FALSE(is_cpd(seq(v), {}).refuted());
}

TEST(IsCpd, StampfliOrbitRefuted) {
  // Weights 1, 0.5, 1, 1, ...: gamma_n = 0.25 for n >= 2.
  std::vector<double> v{1.0, 1.0};
  for (int n = 2; n <= 10; ++n) v.push_back(0.25);
  EXPECT_TRUE(is_cpd(seq(v), {}).refuted());
}

TEST(IsCpd, AtomicMomentsAreCpd) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> node(0.0, 3.0), mass(0.1, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Atom> atoms;
    for (int i = 0; i < 3; ++i) atoms.push_back({node(rng), mass(rng)});
    const auto g = moments(AtomicMeasure(atoms), 12);
    const auto pd = is_pd(g, {});
    ASSERT_FALSE(pd.refuted());
    EXPECT_FALSE(is_cpd(g, {}).refuted()) << "trial " << trial;
  }
}

TEST(IsCpd, DifferenceBasisIdentity) {
  // sum gamma_{i+j} l_i l_j with sum l_i = 0 equals the Hankel form of the
  // second difference against the coordinates mu in l = sum mu_i (e_i - e_{i+1}).
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t m = 2 + static_cast<std::size_t>(trial % 6);
    std::vector<double> g(2 * m + 1);
    for (auto& x : g) x = u(rng) * 10;
    Vec<double> mu(static_cast<Eigen::Index>(m));
    for (auto& x : mu) x = u(rng);
    Vec<double> lambda = Vec<double>::Zero(static_cast<Eigen::Index>(m + 1));
    for (Eigen::Index i = 0; i < mu.size(); ++i) {
      lambda(i) += mu(i);
      lambda(i + 1) -= mu(i);
    }
    ASSERT_NEAR(lambda.sum(), 0.0, 1e-14);
    EXPECT_TRUE(lambda.isApprox(from_difference_basis(mu), 1e-15));
    double lhs = 0.0, lhs_scale = 0.0;
    for (std::size_t i = 0; i <= m; ++i)
      for (std::size_t j = 0; j <= m; ++j) {
        lhs += g[i + j] * lambda(static_cast<Eigen::Index>(i)) * lambda(static_cast<Eigen::Index>(j));
        lhs_scale += std::abs(g[i + j] * lambda(static_cast<Eigen::Index>(i)) * lambda(static_cast<Eigen::Index>(j)));
      }
    const auto beta = second_difference(seq(g));
    const double rhs = mu.dot(hankel(beta, 0, m) * mu);
    EXPECT_LE(std::abs(lhs - rhs), 1e-12 * lhs_scale);
  }
}

TEST(QPoly, ZeroAndOneVanish) {
  for (double x : {0.0, 0.5, 1.0, 1.00001, 3.0}) {
    EXPECT_EQ(q_poly(0, x), 0.0);
    EXPECT_EQ(q_poly(1, x), 0.0);
  }
}

TEST(QPoly, SmallValues) {
  EXPECT_DOUBLE_EQ(q_poly(3, 2.0), 4.0);
  for (std::size_t n = 0; n <= 40; ++n) EXPECT_DOUBLE_EQ(q_poly(n, 1.0), n * (n - 1) / 2.0);
}

TEST(QPoly, RecurrenceOnGrid) {
  for (std::size_t n = 0; n <= 40; ++n)
    for (int i = 0; i <= 200; ++i) {
      const double x = i * 0.05;
      const double lhs = q_poly(n + 2, x) - 2 * q_poly(n + 1, x) + q_poly(n, x);
      const double rhs = std::pow(x, static_cast<double>(n));
      const double scale = std::max({std::abs(q_poly(n + 2, x)), std::abs(rhs), 1.0});
      EXPECT_LE(std::abs(lhs - rhs), 1e-10 * scale) << "n=" << n << " x=" << x;
    }
}

TEST(QPoly, MatchesBothIndependentForms) {
  for (std::size_t n = 2; n <= 40; ++n)
    for (double x : {0.0, 0.3, 0.99, 0.9999, 1.0, 1.00005, 1.001, 2.5, 7.0, 10.0}) {
      const double ref = q_sum(n, x);
      EXPECT_LE(std::abs(q_poly(n, x) - ref), 1e-10 * std::max(1.0, ref)) << n << " " << x;
      if (std::abs(x - 1.0) >= 1e-4) EXPECT_LE(std::abs(q_closed(n, x) - ref), 1e-10 * std::max(1.0, ref));
    }
}

TEST(FiniteDifference, Examples) {
  std::vector<double> lin, sq, pw;
  for (int n = 0; n <= 8; ++n) {
    lin.push_back(n + 1);
    sq.push_back(n * n);
    pw.push_back(std::pow(2.0, n));
  }
  const auto d3 = finite_difference(seq(lin), 3);
  for (std::size_t n = 0; n < d3.size(); ++n) EXPECT_EQ(d3[n], 0.0);
  const auto d2 = finite_difference(seq(sq), 2);
  for (std::size_t n = 0; n < d2.size(); ++n) EXPECT_EQ(d2[n], 2.0);
  const auto d1 = finite_difference(seq(pw), 1);
  for (std::size_t n = 0; n < d1.size(); ++n) EXPECT_EQ(d1[n], pw[n]);
  EXPECT_THROW((void)finite_difference(seq({1, 2}), 3), Error);
}

TEST(MomentSequence, StrideAndShift) {
  const auto s = seq({0, 1, 2, 3, 4, 5, 6});
  const auto st = s.stride(3);
  ASSERT_EQ(st.size(), 3u);
  EXPECT_EQ(st[2], 6.0);
  EXPECT_EQ(s.shifted(2)[0], 2.0);
}
