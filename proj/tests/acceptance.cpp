// Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned
// below. Exit status is nonzero if any criterion fails.

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "qspr/case_study.hpp"
#include "qspr/fock_oracle.hpp"
#include "qspr/optics.hpp"
#include "qspr/philox.hpp"
#include "qspr/probes.hpp"
#include "qspr/simulate.hpp"

using namespace qspr;

namespace {

constexpr std::uint64_t kSeed = 42;
constexpr int kSets = 200;

constexpr double kTolAngleKausaite = 0.001;  // deg
constexpr double kTolAngleLahiri = 0.005;    // deg
constexpr double kTolKausaiteFit = 0.02;
constexpr double kTolLahiriFit = 0.005;
constexpr double kTolOracle = 1e-6;
constexpr double kTolOptimizedIdentity = 1e-12;
constexpr double kTolMidpointPrediction = 0.15;
constexpr double kTolMEnhancement = 0.10;
constexpr double kTolScaling = 0.15;

int failures = 0;

void report(int id, bool ok, const std::string& what) {
  std::printf("[%s] criterion %2d: %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

bool within(double value, double target, double rel) { return std::abs(value - target) <= rel * std::abs(target); }

std::string fmt3(const char* label, const PerParameter& p) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s k_a %.4g, k_s %.4g, k_d %.4g", label, p.k_a, p.k_s, p.k_d);
  return buf;
}

bool all_within(const PerParameter& p, double target, double rel) {
  return within(p.k_a, target, rel) && within(p.k_s, target, rel) && within(p.k_d, target, rel);
}

SimulationPlan kausaite_plan(const PreparedCase& pc, ProbeState state, long long nu, int m, double eta = 1.0) {
  SimulationPlan plan;
  plan.nu = nu;
  plan.m = m;
  plan.p = kSets;
  plan.seed = kSeed;
  plan.state = state;
  plan.scenario = SensingScenario::standard(eta);
  plan.grid = pc.study.grid;
  plan.tau_s = pc.study.kinetics.tau_s;
  plan.L0 = pc.study.kinetics.L0;
  return plan;
}

void criterion1() {
  const double k = resonance_angle(1.3385, -14.358, 1.5107);
  const double l = resonance_angle(1.3385, -20.913, 1.523);
  const bool ok_k = std::abs(k - 71.0966) <= kTolAngleKausaite;
  const bool ok_l = std::abs(l - 66.796) <= kTolAngleLahiri;
  char buf[200];
  std::snprintf(buf, sizeof buf, "resonance angle Kausaite %.4f (want 71.0966) %s, Lahiri %.4f (want 66.796) %s", k,
                ok_k ? "ok" : "off", l, ok_l ? "ok" : "off");
  report(1, ok_k && ok_l, buf);
}

void criterion2(const PreparedCase& pc) {
  const auto& f = pc.noise_free_fit;
  const bool ok = f.converged && within(f.k_s, 0.0105, kTolKausaiteFit) && within(f.k_d, 7.771e-3, kTolKausaiteFit) &&
                  within(f.k_a, 10.029e3, kTolKausaiteFit);
  char buf[200];
  std::snprintf(buf, sizeof buf, "Kausaite noise-free fit k_s %.5g k_d %.5g k_a %.5g", f.k_s, f.k_d, f.k_a);
  report(2, ok, buf);
}

void criterion3() {
  const auto pc = prepare_case(lahiri1999());
  const auto& f = pc.noise_free_fit;
  const bool ok = f.converged && within(f.k_s, 22.98e-3, kTolLahiriFit) && within(f.k_d, 15e-3, kTolLahiriFit) &&
                  within(f.k_a, 3.8e-3, kTolLahiriFit);
  char buf[200];
  std::snprintf(buf, sizeof buf, "Lahiri noise-free fit k_s %.5g k_d %.5g k_a %.5g", f.k_s, f.k_d, f.k_a);
  report(3, ok, buf);
}

void criterion4() {
  const auto r = oracle::verify_closed_forms(60, 50, 2024, kTolOracle);
  std::string what = "oracle vs closed forms, 50 tuples/state:";
  for (const auto& k : r.kinds) {
    char buf[64];
    std::snprintf(buf, sizeof buf, " %s %.2e%s", std::string(to_string(k.kind)).c_str(), k.max_deviation(),
                  k.truncation_failure ? " (truncated)" : "");
    what += buf;
  }
  report(4, r.passed(), what);
}

void criterion5() {
  double worst = 0.0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    const auto b = Substream{kSeed, 0, i, 5}.block(0);
    const double T = uniform_closed_open(b[0]);
    const double eta = uniform_open_closed(b[1]);
    const double N = 1.0 + 1e4 * uniform_closed_open(b[2]);
    const Losses loss{eta, eta * T};
    const double a = delta_M(ProbeState::tmf(N), T, loss);
    const double c = delta_M(ProbeState::tmsv(N), T, loss);
    worst = std::max(worst, std::abs(a - c) / std::max(std::abs(c), 1e-300));
  }
  char buf[120];
  std::snprintf(buf, sizeof buf, "optimized TMF/TMSV noise identity, 1000 tuples, worst rel %.2e", worst);
  report(5, worst <= kTolOptimizedIdentity, buf);
}

}  // namespace

int main() {
  criterion1();
  const auto kausaite = prepare_case(kausaite2007());
  criterion2(kausaite);
  criterion3();
  criterion4();
  criterion5();

  const auto& T = kausaite.ideal_T();
  const auto tmc10 = run_ensemble(kausaite_plan(kausaite, ProbeState::tmc(10), 100, 10), T);
  const auto tmf10 = run_ensemble(kausaite_plan(kausaite, ProbeState::tmf(10), 100, 10), T);

  {
    const double rm = enhancement_RM(ProbeState::tmf(10), kausaite.t_mid, SensingScenario::standard());
    const auto rk = enhancement_Rk(tmc10, tmf10);
    char buf[64];
    std::snprintf(buf, sizeof buf, " vs R_M(T_mid) %.4f", rm);
    report(6, all_within(rk, rm, kTolMidpointPrediction), fmt3("R_k(TMF)", rk) + buf);
  }
  {
    const auto tmf50 = run_ensemble(kausaite_plan(kausaite, ProbeState::tmf(10), 100, 50), T);
    const auto r = m_enhancement(tmf50, tmf10);
    report(7, all_within(r, std::sqrt(5.0), kTolMEnhancement), fmt3("TMF m=50 vs m=10", r) + " (want 2.236)");
  }
  {
    const auto tmc400 = run_ensemble(kausaite_plan(kausaite, ProbeState::tmc(10), 400, 10), T);
    const auto tmf400 = run_ensemble(kausaite_plan(kausaite, ProbeState::tmf(10), 400, 10), T);
    const auto rc = detail::precision_ratios(tmc10, tmc400);
    const auto rf = detail::precision_ratios(tmf10, tmf400);
    report(8, all_within(rc, 2.0, kTolScaling) && all_within(rf, 2.0, kTolScaling),
           fmt3("nu 100->400 TMC", rc) + "; " + fmt3("TMF", rf) + " (want 2)");
  }
  {
    const auto sc = SensingScenario::standard();
    const double big = enhancement_RM(ProbeState::tmsv(1e4), kausaite.t_mid, sc);
    const double small = enhancement_RM(ProbeState::tmsv(10), kausaite.t_mid, sc);
    char buf[120];
    std::snprintf(buf, sizeof buf, "TMSV R_M at T_mid: N=1e4 %.4f, N=10 %.4f", big, small);
    report(9, big < 1.0 && big < small, buf);
  }
  {
    const auto c = run_ensemble(kausaite_plan(kausaite, ProbeState::tmc(10), 100, 10, 0.8), T);
    const auto q = run_ensemble(kausaite_plan(kausaite, ProbeState::tmf(10), 100, 10, 0.8), T);
    const auto rk = enhancement_Rk(c, q);
    report(10, rk.k_a > 1.0 && rk.k_s > 1.0 && rk.k_d > 1.0, fmt3("eta=0.8 R_k(TMF)", rk));
  }

  std::printf("%d criterion(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}
