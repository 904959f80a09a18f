#pragma once

// Monte Carlo estimation of kinetic-parameter precision.
//
// Each time instance of a simulated sensorgram is the mean of nu
// measurements, drawn as Normal(<M>(t), Delta M(t) / sqrt(nu)). A set holds
// m such sensorgrams; each is fitted and the fitted rates averaged into
// k-bar. Over p sets, the mean of k-bar is the estimate and its standard
// deviation the precision.
//
// Noise for (set s, sensorgram j, time i) comes from a Philox block keyed by
// the plan seed with counter (i, j, s), so the outcome does not depend on the
// number of worker threads. Two plans sharing a seed share their standard
// normal draws, which is what makes classical/quantum precision ratios
// comparable at modest p.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "qspr/fit.hpp"
#include "qspr/kinetics.hpp"
#include "qspr/philox.hpp"
#include "qspr/probes.hpp"

namespace qspr {

/// Where noise is injected: intensity-difference space (the default) or
/// transmittance space. The two are affinely related.
enum class NoiseSpace { measurement, transmittance };

inline constexpr double kUnreliableFailureFraction = 0.2;

struct SimulationPlan {
  long long nu = 100;
  int m = 10;
  int p = 1500;
  std::uint64_t seed = 0;
  ProbeState state = ProbeState::tmc(10.0);
  SensingScenario scenario;
  TimeGrid grid;
  double tau_s = 0.0;
  double L0 = 0.0;
  NoiseSpace space = NoiseSpace::measurement;
  double noise_scale = 1.0;  // 0 switches noise off
  FitConfig fit;

  void validate() const {
    if (nu < 1 || m < 1 || p < 1) throw std::invalid_argument("SimulationPlan: nu, m and p must be >= 1");
    state.validate();
    scenario.validate();
    grid.validate();
    if (!(tau_s > grid.t_start && tau_s < grid.t_end))
      throw std::invalid_argument("SimulationPlan: tau must fall inside the time grid");
    if (!(L0 > 0.0)) throw std::invalid_argument("SimulationPlan: L0 must be > 0");
    if (!(noise_scale >= 0.0)) throw std::invalid_argument("SimulationPlan: noise_scale must be >= 0");
    fit.validate();
  }
};

struct ParameterSummary {
  double estimate = 0.0;
  double precision = 0.0;
};

/// One value per kinetic parameter.
struct PerParameter {
  double k_a = 0.0;
  double k_s = 0.0;
  double k_d = 0.0;
};

struct TrialEnsembleResult {
  SimulationPlan plan;
  ParameterSummary k_a;
  ParameterSummary k_s;
  ParameterSummary k_d;
  std::size_t failed_fit_count = 0;
  std::size_t total_fits = 0;
  std::size_t negative_ka_count = 0;
  bool unreliable = false;
  std::vector<PerParameter> set_means;  // k-bar of every set, in set order

  double failed_fraction() const {
    return total_fits == 0 ? 0.0 : static_cast<double>(failed_fit_count) / static_cast<double>(total_fits);
  }
  PerParameter precisions() const { return {k_a.precision, k_s.precision, k_d.precision}; }
  PerParameter estimates() const { return {k_a.estimate, k_s.estimate, k_d.estimate}; }
};

/// Draws one noisy sensorgram. In measurement space the values are
/// M-bar(t); in transmittance space they are T-bar(t).
inline std::vector<double> synthesize_noisy_sensorgram(std::span<const double> ideal_T, const SimulationPlan& plan,
                                                       const Substream& stream) {
  std::vector<double> out(ideal_T.size());
  const double root_nu = std::sqrt(static_cast<double>(plan.nu));
  for (std::size_t i = 0; i < ideal_T.size(); ++i) {
    const double T = ideal_T[i];
    const double z = plan.noise_scale == 0.0 ? 0.0 : stream.normal(i);
    if (plan.space == NoiseSpace::measurement) {
      const double sd = delta_M(plan.state, T, plan.scenario) / root_nu;
      out[i] = mean_M(plan.state, T, plan.scenario) + plan.noise_scale * sd * z;
    } else {
      const double sd = delta_T(plan.state, T, plan.scenario, plan.nu);
      out[i] = T + plan.noise_scale * sd * z;
    }
  }
  return out;
}

namespace detail {

struct SetOutcome {
  PerParameter mean;
  std::size_t failed = 0;
  std::size_t negative_ka = 0;
};

inline SetOutcome run_set(const SimulationPlan& plan, std::span<const double> times, std::span<const double> ideal_T,
                          std::uint64_t set) {
  SetOutcome out;
  std::size_t ok = 0;
  for (int j = 0; j < plan.m; ++j) {
    const Substream stream{plan.seed, set, static_cast<std::uint64_t>(j), 0};
    const auto y = synthesize_noisy_sensorgram(ideal_T, plan, stream);
    const FitResult f = fit_sensorgram(times, y, plan.tau_s, plan.L0, plan.fit);
    if (!f.converged) {
      ++out.failed;
      continue;
    }
    if (f.ka_negative) ++out.negative_ka;
    ++ok;
    out.mean.k_a += f.k_a;
    out.mean.k_s += f.k_s;
    out.mean.k_d += f.k_d;
  }
  if (ok == 0)
    throw std::runtime_error("run_ensemble: every fit in set " + std::to_string(set) +
                             " failed; the signal-to-noise ratio is too low to extract kinetics (raise nu or N)");
  const double inv = 1.0 / static_cast<double>(ok);
  out.mean.k_a *= inv;
  out.mean.k_s *= inv;
  out.mean.k_d *= inv;
  return out;
}

// Welford accumulation; identical inputs give exactly zero spread.
struct RunningMoments {
  double mean = 0.0;
  double m2 = 0.0;
  std::size_t n = 0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  ParameterSummary summary() const {
    return {mean, n > 1 ? std::sqrt(std::max(m2, 0.0) / static_cast<double>(n - 1)) : 0.0};
  }
};

}  // namespace detail

/// Runs p sets of m sensorgrams. `threads` (0 = hardware concurrency) only
/// affects wall time.
inline TrialEnsembleResult run_ensemble(const SimulationPlan& plan, std::span<const double> ideal_T,
                                        unsigned threads = 1) {
  plan.validate();
  const std::vector<double> times = plan.grid.points();
  if (times.size() != ideal_T.size())
    throw std::invalid_argument("run_ensemble: ideal sensorgram does not match the plan's time grid");
  for (double T : ideal_T)
    if (!(T >= 0.0 && T <= 1.0)) throw std::invalid_argument("run_ensemble: ideal transmittance outside [0, 1]");

  const auto sets = static_cast<std::size_t>(plan.p);
  std::vector<detail::SetOutcome> outcomes(sets);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, sets));

  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t s = next++; s < sets; s = next++) {
      try {
        outcomes[s] = detail::run_set(plan, times, ideal_T, s);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = sets;
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  TrialEnsembleResult res;
  res.plan = plan;
  detail::RunningMoments ka, ks, kd;
  res.set_means.reserve(sets);
  for (const auto& o : outcomes) {
    ka.add(o.mean.k_a);
    ks.add(o.mean.k_s);
    kd.add(o.mean.k_d);
    res.failed_fit_count += o.failed;
    res.negative_ka_count += o.negative_ka;
    res.set_means.push_back(o.mean);
  }
  res.k_a = ka.summary();
  res.k_s = ks.summary();
  res.k_d = kd.summary();
  res.total_fits = sets * static_cast<std::size_t>(plan.m);
  res.unreliable = res.failed_fraction() > kUnreliableFailureFraction;
  return res;
}

namespace detail {

inline double precision_ratio(double numerator, double denominator) {
  if (denominator == 0.0) return numerator == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  return numerator / denominator;
}

inline PerParameter precision_ratios(const TrialEnsembleResult& num, const TrialEnsembleResult& den) {
  return {precision_ratio(num.k_a.precision, den.k_a.precision),
          precision_ratio(num.k_s.precision, den.k_s.precision),
          precision_ratio(num.k_d.precision, den.k_d.precision)};
}

}  // namespace detail

/// R_k = Delta k_C / Delta k_Q per parameter. The plans must agree on
/// everything except the probe kind.
inline PerParameter enhancement_Rk(const TrialEnsembleResult& classical, const TrialEnsembleResult& quantum) {
  const auto& a = classical.plan;
  const auto& b = quantum.plan;
  if (a.nu != b.nu || a.m != b.m || a.p != b.p || !(a.grid == b.grid) || !(a.scenario == b.scenario) ||
      a.state.n_mean != b.state.n_mean || a.space != b.space)
    throw std::invalid_argument("enhancement_Rk: plans differ in more than the probe state");
  return detail::precision_ratios(classical, quantum);
}

/// Gain from averaging more sensorgrams per set: Delta k(m') / Delta k(m)
/// for results at m (`more`) and m' (`fewer`); expected sqrt(m / m').
inline PerParameter m_enhancement(const TrialEnsembleResult& more, const TrialEnsembleResult& fewer) {
  const auto& a = more.plan;
  const auto& b = fewer.plan;
  if (a.nu != b.nu || a.p != b.p || !(a.grid == b.grid) || !(a.scenario == b.scenario) ||
      a.state.n_mean != b.state.n_mean || a.state.kind != b.state.kind || a.space != b.space)
    throw std::invalid_argument("m_enhancement: plans differ in more than m");
  return detail::precision_ratios(fewer, more);
}

/// Same ratio from enhancement ratios R_{k,m} and R_{k,m'} measured against
/// a common classical reference.
inline PerParameter m_enhancement(const PerParameter& rk_more, const PerParameter& rk_fewer) {
  return {rk_more.k_a / rk_fewer.k_a, rk_more.k_s / rk_fewer.k_s, rk_more.k_d / rk_fewer.k_d};
}

}  // namespace qspr
