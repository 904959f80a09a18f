#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "qspr/case_study.hpp"
#include "qspr/simulate.hpp"

using namespace qspr;

namespace {

const PreparedCase& kausaite() {
  static const PreparedCase pc = prepare_case(kausaite2007());
  return pc;
}

SimulationPlan small_plan(ProbeState state = ProbeState::tmc(10)) {
  const auto& pc = kausaite();
  SimulationPlan p;
  p.nu = 100;
  p.m = 3;
  p.p = 12;
  p.seed = 5;
  p.state = state;
  p.scenario = SensingScenario::standard();
  p.grid = pc.study.grid;
  p.tau_s = pc.study.kinetics.tau_s;
  p.L0 = pc.study.kinetics.L0;
  return p;
}

}  // namespace

TEST(Synthesize, NoiseOffIsExact) {
  auto plan = small_plan();
  plan.noise_scale = 0.0;
  const auto& T = kausaite().ideal_T();
  const auto y = synthesize_noisy_sensorgram(T, plan, Substream{1, 0, 0, 0});
  for (std::size_t i = 0; i < T.size(); ++i) EXPECT_EQ(y[i], mean_M(plan.state, T[i], plan.scenario));
}

TEST(Synthesize, SampleMeanLaw) {
  const auto plan = small_plan(ProbeState::tmf(10));
  const std::vector<double> T{0.45};
  const int draws = 10000;
  double sum = 0.0;
  for (int j = 0; j < draws; ++j)
    sum += synthesize_noisy_sensorgram(T, plan, Substream{plan.seed, 0, static_cast<std::uint64_t>(j), 0})[0];
  const double se = delta_M(plan.state, 0.45, plan.scenario) / std::sqrt(100.0) / std::sqrt(draws);
  EXPECT_LT(std::abs(sum / draws - mean_M(plan.state, 0.45, plan.scenario)), 4.0 * se);
}

TEST(Synthesize, SpacesAreAffinelyRelated) {
  auto plan = small_plan(ProbeState::tmsv(7));
  const auto& T = kausaite().ideal_T();
  const Substream s{3, 1, 2, 0};
  const auto m = synthesize_noisy_sensorgram(T, plan, s);
  plan.space = NoiseSpace::transmittance;
  const auto t = synthesize_noisy_sensorgram(T, plan, s);
  const double slope = sensitivity(plan.state, plan.scenario);
  const double offset = -plan.scenario.eta_b() * plan.state.reference_photons();
  for (std::size_t i = 0; i < T.size(); ++i) EXPECT_NEAR(m[i], offset + slope * t[i], 1e-12 * slope);
}

TEST(Ensemble, DeterministicAcrossThreads) {
  const auto plan = small_plan();
  const auto a = run_ensemble(plan, kausaite().ideal_T(), 1);
  const auto b = run_ensemble(plan, kausaite().ideal_T(), 3);
  const auto c = run_ensemble(plan, kausaite().ideal_T(), 1);
  for (const auto* r : {&b, &c}) {
    EXPECT_EQ(a.k_a.estimate, r->k_a.estimate);
    EXPECT_EQ(a.k_s.precision, r->k_s.precision);
    EXPECT_EQ(a.k_d.precision, r->k_d.precision);
    ASSERT_EQ(a.set_means.size(), r->set_means.size());
    for (std::size_t i = 0; i < a.set_means.size(); ++i) EXPECT_EQ(a.set_means[i].k_s, r->set_means[i].k_s);
  }
}

TEST(Ensemble, NoNoiseGivesNoiseFreeFit) {
  auto plan = small_plan();
  plan.noise_scale = 0.0;
  plan.space = NoiseSpace::transmittance;
  const auto r = run_ensemble(plan, kausaite().ideal_T());
  const auto& f = kausaite().noise_free_fit;
  EXPECT_EQ(r.k_s.precision, 0.0);
  EXPECT_EQ(r.k_d.precision, 0.0);
  EXPECT_EQ(r.k_a.precision, 0.0);
  EXPECT_NEAR(r.k_s.estimate, f.k_s, 1e-12 * f.k_s);
  EXPECT_NEAR(r.k_d.estimate, f.k_d, 1e-12 * f.k_d);
  EXPECT_EQ(r.failed_fit_count, 0u);
  EXPECT_FALSE(r.unreliable);
}

TEST(Ensemble, SpaceChoiceDoesNotChangeFits) {
  auto plan = small_plan();
  const auto a = run_ensemble(plan, kausaite().ideal_T());
  plan.space = NoiseSpace::transmittance;
  const auto b = run_ensemble(plan, kausaite().ideal_T());
  EXPECT_NEAR(a.k_s.precision / b.k_s.precision, 1.0, 1e-6);
  EXPECT_NEAR(a.k_d.estimate / b.k_d.estimate, 1.0, 1e-8);
}

TEST(Ensemble, RejectsBadPlans) {
  auto plan = small_plan();
  plan.p = 0;
  EXPECT_THROW(run_ensemble(plan, kausaite().ideal_T()), std::invalid_argument);
  plan = small_plan();
  plan.tau_s = 5000.0;
  EXPECT_THROW(run_ensemble(plan, kausaite().ideal_T()), std::invalid_argument);
  plan = small_plan();
  EXPECT_THROW(run_ensemble(plan, std::vector<double>(10, 0.4)), std::invalid_argument);
}

TEST(Ensemble, HopelessNoiseIsReported) {
  auto plan = small_plan();
  plan.nu = 1;
  plan.state = ProbeState::tmc(0.01);
  plan.p = 4;
  try {
    const auto r = run_ensemble(plan, kausaite().ideal_T());
    EXPECT_GT(r.k_s.precision / r.k_s.estimate, 0.1);
  } catch (const std::runtime_error&) {
    SUCCEED();
  }
}

TEST(Enhancement, IdenticalPlansGiveOne) {
  const auto plan = small_plan();
  const auto a = run_ensemble(plan, kausaite().ideal_T());
  const auto r = enhancement_Rk(a, a);
  EXPECT_EQ(r.k_a, 1.0);
  EXPECT_EQ(r.k_s, 1.0);
  EXPECT_EQ(r.k_d, 1.0);
  const auto m = m_enhancement(a, a);
  EXPECT_EQ(m.k_s, 1.0);
}

TEST(Enhancement, MismatchedPlansRejected) {
  const auto a = run_ensemble(small_plan(), kausaite().ideal_T());
  auto other = small_plan(ProbeState::tmf(10));
  other.nu = 200;
  const auto b = run_ensemble(other, kausaite().ideal_T());
  EXPECT_THROW(enhancement_Rk(a, b), std::invalid_argument);
  EXPECT_THROW(m_enhancement(a, b), std::invalid_argument);
}

TEST(Enhancement, MoreSensorgramsAveragePrecisionDown) {
  auto plan = small_plan();
  plan.p = 1500;
  plan.m = 10;
  const auto few = run_ensemble(plan, kausaite().ideal_T());
  plan.m = 40;
  const auto many = run_ensemble(plan, kausaite().ideal_T());
  const auto r = m_enhancement(many, few);
  EXPECT_NEAR(r.k_a, 2.0, 0.2);
  EXPECT_NEAR(r.k_s, 2.0, 0.2);
  EXPECT_NEAR(r.k_d, 2.0, 0.2);
}
