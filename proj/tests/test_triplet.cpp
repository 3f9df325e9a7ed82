#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cpdshift/roots.hpp"
#include "cpdshift/triplet.hpp"

using namespace cpd;

namespace {

MomentSequence quadratic(double b, double c, std::size_t order) {
  std::vector<double> v;
  for (std::size_t n = 0; n <= order; ++n) v.push_back(1 + b * n + c * double(n) * double(n));
  return MomentSequence(v);
}

void expect_same(const AtomicMeasure& got, const AtomicMeasure& want, double tol) {
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) {
    EXPECT_NEAR(got.atoms()[i].node, want.atoms()[i].node, tol);
    EXPECT_NEAR(got.atoms()[i].mass, want.atoms()[i].mass, tol * std::max(1.0, want.atoms()[i].mass));
  }
}

const ScalarTriplet kFour{3.0, 0.0, AtomicMeasure({{4.0, 9.0}})};

}  // namespace

TEST(MakeTriplet, Validation) {
  EXPECT_EQ(make_triplet(0.1, -1e-9, AtomicMeasure()).c, 0.0);
  EXPECT_THROW(make_triplet(0.1, -0.5, AtomicMeasure()), Error);
  EXPECT_THROW(make_triplet(0.1, 0.0, AtomicMeasure({{1.0, 0.2}})), Error);
}

TEST(RecoverTriplet, Isometry) {
  const auto t = recover_triplet(MomentSequence(std::vector<double>(12, 1.0)));
  EXPECT_NEAR(t.b, 0.0, 1e-12);
  EXPECT_NEAR(t.c, 0.0, 1e-12);
  EXPECT_TRUE(t.F.empty());
}

TEST(RecoverTriplet, QuadraticGivesPointMassAtOne) {
  const auto t = recover_triplet(quadratic(0.3, 0.5, 10));
  EXPECT_NEAR(t.b, 0.3, 1e-10);
  EXPECT_NEAR(t.c, 0.5, 1e-10);
  EXPECT_TRUE(t.F.empty());
}

TEST(RecoverTriplet, PowersOfFour) {
  std::vector<double> v;
  for (int n = 0; n <= 9; ++n) v.push_back(std::pow(4.0, n));
  const auto t = recover_triplet(MomentSequence(v));
  EXPECT_NEAR(t.b, 3.0, 1e-10);
  EXPECT_NEAR(t.c, 0.0, 1e-10);
  expect_same(t.F, AtomicMeasure({{4.0, 9.0}}), 1e-9);
}

TEST(RecoverTriplet, Errors) {
  std::vector<double> stampfli{1.0, 1.0};
  for (int n = 2; n <= 10; ++n) stampfli.push_back(0.25);
  try {
    (void)recover_triplet(MomentSequence(stampfli));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotCPD);
  }
  EXPECT_THROW((void)recover_triplet(MomentSequence({2, 2, 2, 2, 2, 2, 2})), Error);
}

TEST(ReconstructMoments, Examples) {
  const auto ones = reconstruct_moments(ScalarTriplet{}, 5);
  for (std::size_t n = 0; n <= 5; ++n) EXPECT_EQ(ones[n], 1.0);
  const auto four = reconstruct_moments(kFour, 3);
  for (std::size_t n = 0; n <= 3; ++n) EXPECT_NEAR(four[n], std::pow(4.0, n), 1e-13 * std::pow(4.0, n));
  const auto q = reconstruct_moments(ScalarTriplet{0.3, 0.5, {}}, 2);
  EXPECT_NEAR(q[1], 1.8, 1e-15);
  EXPECT_NEAR(q[2], 3.6, 1e-15);
}

TEST(SubnormalityCertificate, Examples) {
  const auto pass = subnormality_certificate(kFour);
  EXPECT_TRUE(pass.passed);
  EXPECT_DOUBLE_EQ(pass.mass_integral, 1.0);
  EXPECT_DOUBLE_EQ(pass.b_integral, 3.0);

  // Conditions are reported in order; b = 0.3 already breaks (b) here.
  const auto c_fail = subnormality_certificate(ScalarTriplet{0.3, 0.5, {}});
  EXPECT_FALSE(c_fail.passed);
  EXPECT_FALSE(c_fail.c_ok);
  EXPECT_EQ(c_fail.first_failure, "b");
  const auto only_c = subnormality_certificate(ScalarTriplet{0.0, 0.5, {}});
  EXPECT_EQ(only_c.first_failure, "c");

  const auto a_fail = subnormality_certificate(ScalarTriplet{0.0, 0.0, AtomicMeasure({{4.0, 18.0}})});
  EXPECT_FALSE(a_fail.passed);
  EXPECT_EQ(a_fail.first_failure, "a");
  EXPECT_DOUBLE_EQ(a_fail.mass_integral, 2.0);
}

TEST(BergerMeasure, Examples) {
  expect_same(berger_measure(kFour), AtomicMeasure({{4.0, 1.0}}), 1e-12);
  expect_same(berger_measure(ScalarTriplet{}), AtomicMeasure({{1.0, 1.0}}), 1e-12);
  expect_same(berger_measure(ScalarTriplet{-0.25, 0.0, AtomicMeasure({{0.5, 0.125}})}),
              AtomicMeasure({{0.5, 0.5}, {1.0, 0.5}}), 1e-12);
  try {
    (void)berger_measure(ScalarTriplet{0.3, 0.5, {}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::CertificateFailed);
  }
}

TEST(QuasinormalCertificate, Examples) {
  EXPECT_TRUE(shift_quasinormal_certificate(kFour));
  EXPECT_TRUE(shift_quasinormal_certificate(ScalarTriplet{}));
  // Triplet of the Berger measure 0.5 delta_0.5 + 0.5 delta_1.
  const auto t = recover_triplet(moments(AtomicMeasure({{0.5, 0.5}, {1.0, 0.5}}), 10));
  EXPECT_FALSE(shift_quasinormal_certificate(t));
}

TEST(PowerTransform, Examples) {
  expect_same(power_transform(kFour, 2), AtomicMeasure({{16.0, 225.0}}), 1e-12);
  for (std::size_t n = 1; n <= 4; ++n)
    expect_same(power_transform(ScalarTriplet{0.0, 0.2, {}}, n), AtomicMeasure({{1.0, 0.4 * n * n}}), 1e-12);
  const ScalarTriplet t{0.1, 0.3, AtomicMeasure({{0.4, 0.2}, {2.5, 0.7}})};
  expect_same(power_transform(t, 1), AtomicMeasure({{0.4, 0.2}, {1.0, 0.6}, {2.5, 0.7}}), 1e-15);
}

TEST(PowerTransform, MatchesPowerOrbitSecondDifferences) {
  // Oracle: second differences of the stride-n subsequence of the
  // reconstructed moments, compared through their moments.
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 50; ++trial) {
    const auto t = random_triplet(rng, 3);
    for (std::size_t n = 2; n <= 3; ++n) {
      const auto predicted = moments(power_transform(t, n), 6);
      const auto direct = second_difference(reconstruct_moments(t, 8 * n).stride(n));
      for (std::size_t k = 0; k <= 6; ++k)
        EXPECT_LE(std::abs(predicted[k] - direct[k]), 1e-8 * std::max(1.0, std::abs(direct[k])));
    }
  }
}

TEST(BnIdentity, Examples) {
  EXPECT_LE(b_n_identity_check(kFour, 2), 1e-8);
  for (std::size_t n = 1; n <= 4; ++n) EXPECT_EQ(b_n_identity_check(ScalarTriplet{}, n), 0.0);
  std::mt19937_64 rng(53);
  for (int trial = 0; trial < 20; ++trial) {
    const auto t = recover_triplet(orbit_moments(random_berger_shift(rng), 0, 14));
    EXPECT_LE(b_n_identity_check(t, 3), 1e-6);
  }
}

TEST(RecoverTriplet, Roundtrip) {
  std::mt19937_64 rng(57);
  for (int trial = 0; trial < 200; ++trial) {
    SCOPED_TRACE(trial);
    const auto t = random_triplet(rng);
    const std::size_t order = std::max<std::size_t>(2 * (t.F.size() + (t.c > 0 ? 1 : 0)) + 4, 5);
    const auto back = recover_triplet(reconstruct_moments(t, order));
    EXPECT_NEAR(back.b, t.b, 1e-6);
    EXPECT_NEAR(back.c, t.c, 1e-6);
    expect_same(back.F, t.F, 1e-6);
  }
}

TEST(RecoverTriplet, UniquenessShadow) {
  // Two different constructions of the same moments land on one triplet.
  const AtomicMeasure mu({{0.5, 0.3}, {2.0, 0.7}});
  const auto from_measure = recover_triplet(moments(mu, 10));
  const auto from_triplet = recover_triplet(reconstruct_moments(from_measure, 10));
  EXPECT_NEAR(from_measure.b, from_triplet.b, 1e-9);
  EXPECT_NEAR(from_measure.c, from_triplet.c, 1e-9);
  expect_same(from_measure.F, from_triplet.F, 1e-8);
}

TEST(Certificate, SoundOnBergerShifts) {
  std::mt19937_64 rng(59);
  for (int trial = 0; trial < 50; ++trial) {
    SCOPED_TRACE(trial);
    const auto shift = random_berger_shift(rng);
    const auto& mu = std::get<BergerGenerated>(shift.model()).measure;
    const auto gamma = orbit_moments(shift, 0, 14);
    const auto t = recover_triplet(gamma);
    ASSERT_TRUE(subnormality_certificate(t).passed);
    const auto berger = berger_measure(t);
    expect_same(berger, mu, 1e-6);
    const auto back = moments(berger, 14);
    const auto rec = reconstruct_moments(t, 14);
    for (std::size_t n = 0; n <= 14; ++n) EXPECT_LE(std::abs(back[n] - rec[n]), 1e-8 * std::max(1.0, rec[n]));
  }
}
