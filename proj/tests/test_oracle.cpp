#include <gtest/gtest.h>

#include <cmath>

#include "qspr/fock_oracle.hpp"

using namespace qspr;
using namespace qspr::oracle;

TEST(BuildState, Tmf) {
  const auto s = build_state(ProbeState::tmf(2), 4);
  for (int a = 0; a <= 4; ++a)
    for (int b = 0; b <= 4; ++b) EXPECT_EQ(std::abs(s.at(a, b)), (a == 2 && b == 2) ? 1.0 : 0.0);
  EXPECT_THROW(build_state(ProbeState::tmf(2.5), 8), std::invalid_argument);
  EXPECT_THROW(build_state(ProbeState::tmf(5), 4), std::domain_error);
}

TEST(BuildState, TmsvVacuumWeight) {
  const auto s = build_state(ProbeState::tmsv_from_squeezing(0.5), 40);
  EXPECT_NEAR(std::norm(s.at(0, 0)), 0.78645, 1e-5);
  EXPECT_NEAR(std::norm(s.at(0, 0)), 1.0 / std::pow(std::cosh(0.5), 2), 1e-14);
  EXPECT_EQ(std::abs(s.at(1, 0)), 0.0);
  EXPECT_NEAR(s.norm(), 1.0, 1e-10);
}

TEST(BuildState, TmsdWithoutDisplacementIsTmsv) {
  const double r = 0.4;
  const double G = std::cosh(r) * std::cosh(r);
  const auto a = build_state(ProbeState::tmsd_from(0.0, G), 40);
  const auto b = build_state(ProbeState::tmsv_from_squeezing(r), 40);
  for (int i = 0; i <= 40; ++i)
    for (int j = 0; j <= 40; ++j) ASSERT_LT(std::abs(a.at(i, j) - b.at(i, j)), 1e-10) << i << "," << j;
}

TEST(BuildState, TruncationIsReported) {
  EXPECT_THROW(build_state(ProbeState::tmc(4.0), 6), std::domain_error);
  EXPECT_THROW(build_state(ProbeState::tmsd_from(4.0, 1.3), 8), std::domain_error);
}

TEST(Channels, Identity) {
  const auto s = build_state(ProbeState::tmc(1.5, 0.7), 30);
  const auto d = apply_channels(s, 1.0, 1.0, 1.0);
  for (int a = 0; a <= 30; ++a)
    for (int b = 0; b <= 30; ++b) ASSERT_NEAR(d.at(a, b), std::norm(s.at(a, b)), 1e-15);
}

TEST(Channels, SinglePhotonBinomial) {
  const auto d = apply_channels(build_state(ProbeState::tmf(1), 3), 0.5, 1.0, 1.0);
  EXPECT_NEAR(d.at(0, 1), 0.5, 1e-15);
  EXPECT_NEAR(d.at(1, 1), 0.5, 1e-15);
  EXPECT_NEAR(d.total(), 1.0, 1e-15);
}

TEST(Channels, PoissonThinning) {
  const auto d = apply_channels(build_state(ProbeState::tmc(3.0), 40), 0.4, 1.0, 1.0);
  double p0 = 0.0;
  for (int b = 0; b <= 40; ++b) p0 += d.at(0, b);
  EXPECT_NEAR(p0, std::exp(-1.2), 1e-10);
}

TEST(OracleMoments, MatchClosedForms) {
  {
    const auto m = oracle_moments(ProbeState::tmf(4), 0.3, 1.0, 1.0, 8);
    EXPECT_NEAR(m.delta_M, std::sqrt(4 * 0.3 * 0.7), 1e-10);
  }
  {
    const auto p = ProbeState::tmsv_from_squeezing(0.4);
    const auto m = oracle_moments(p, 0.6, 0.8, 0.8, 60);
    EXPECT_NEAR(m.delta_M, delta_M(p, 0.6, Losses{0.8, 0.8}), 1e-8);
    EXPECT_NEAR(m.mean_M, mean_M(p, 0.6, Losses{0.8, 0.8}), 1e-8);
  }
  {
    const auto p = ProbeState::tmsd_from(2.0, 1.5);
    const auto m = oracle_moments(p, 0.5, 1.0, 1.0, 60);
    EXPECT_LT(relative_deviation(m.delta_M, delta_M(p, 0.5, Losses{1.0, 1.0})), 1e-6);
    EXPECT_LT(relative_deviation(m.mean_M, mean_M(p, 0.5, Losses{1.0, 1.0})), 1e-6);
  }
}

TEST(OracleMoments, ConvergesWithCutoff) {
  const auto p = ProbeState::tmsd_from(3.0, 1.25);
  const auto a = oracle_moments(p, 0.45, 0.9, 0.7, 40);
  const auto b = oracle_moments(p, 0.45, 0.9, 0.7, 80);
  EXPECT_NEAR(a.delta_M, b.delta_M, 1e-9);
  EXPECT_NEAR(a.mean_M, b.mean_M, 1e-9);
}

TEST(Verify, AllKindsAgree) {
  const auto report = verify_closed_forms(60, 50);
  ASSERT_EQ(report.kinds.size(), 4u);
  for (const auto& k : report.kinds) {
    EXPECT_FALSE(k.truncation_failure) << to_string(k.kind) << ": " << k.diagnostic;
    EXPECT_LE(k.max_deviation(), 1e-6) << to_string(k.kind);
  }
  EXPECT_TRUE(report.passed());
}

TEST(Verify, UnderTruncationFails) {
  EXPECT_FALSE(verify_closed_forms(6, 10).passed());
  EXPECT_THROW(verify_closed_forms(60, 0), std::invalid_argument);
}
