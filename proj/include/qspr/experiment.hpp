#pragma once

// Sweep runner: resolves a case, runs one ensemble per (state, N, nu, m)
// and writes plot-ready CSVs plus a manifest that can be fed back in.
//
// Every plan in one experiment shares the configured seed, so states and
// sweep points see the same standard normal draws. The classical reference
// for R_k is always run at each sweep point, listed or not.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "json.hpp"
#include "qspr/case_study.hpp"
#include "qspr/probes.hpp"
#include "qspr/simulate.hpp"

namespace qspr {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kResultsSchemaVersion = 1;
inline constexpr int kDefaultSets = 200;
inline constexpr int kPaperFidelitySets = 1500;

struct StateSpec {
  StateKind kind = StateKind::TMC;
  double g = kDefaultTmsdGain;

  friend bool operator==(const StateSpec&, const StateSpec&) = default;
};

struct MapRanges {
  std::vector<double> T;
  std::vector<double> N;
};

struct ExperimentConfig {
  std::string case_name = "kausaite2007";
  std::optional<OpticalStack> stack;
  std::optional<KineticParameters> kinetics;
  std::optional<double> angular_amplitude_deg;
  std::optional<TimeGrid> grid;
  std::optional<bool> linearize;
  ScenarioMode scenario_mode = ScenarioMode::Standard;
  double eta_a = 1.0;
  std::optional<double> t_mid;  // Optimized only; defaults to the case mid-point
  std::vector<StateSpec> states;
  std::vector<double> N;
  std::vector<long long> nu;  // empty: the case default
  std::vector<int> m;
  int p = kDefaultSets;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  NoiseSpace space = NoiseSpace::measurement;
  MapRanges map;

  void validate() const;
  CaseStudy resolve() const;
};

// ---- JSON --------------------------------------------------------------

namespace detail {

using json = nlohmann::json;

inline std::string to_string(NoiseSpace s) { return s == NoiseSpace::measurement ? "measurement" : "transmittance"; }

inline NoiseSpace parse_noise_space(const std::string& s) {
  if (s == "measurement") return NoiseSpace::measurement;
  if (s == "transmittance") return NoiseSpace::transmittance;
  throw std::invalid_argument("unknown noise_space '" + s + "' (measurement, transmittance)");
}

inline json stack_to_json(const OpticalStack& s) {
  return {{"wavelength_nm", s.wavelength_nm},
          {"n_prism", s.n_prism},
          {"eps_metal", {s.eps_metal.real(), s.eps_metal.imag()}},
          {"metal_thickness_nm", s.metal_thickness_nm},
          {"theta_in_deg", s.theta_in_deg}};
}

inline OpticalStack stack_from_json(const json& j) {
  OpticalStack s;
  s.wavelength_nm = j.at("wavelength_nm").get<double>();
  s.n_prism = j.at("n_prism").get<double>();
  const auto& e = j.at("eps_metal");
  s.eps_metal = {e.at(0).get<double>(), e.at(1).get<double>()};
  s.metal_thickness_nm = j.at("metal_thickness_nm").get<double>();
  s.theta_in_deg = j.at("theta_in_deg").get<double>();
  return s;
}

inline json kinetics_to_json(const KineticParameters& k) {
  return {{"k_a", k.k_a}, {"k_d", k.k_d}, {"L0", k.L0}, {"tau_s", k.tau_s}};
}

inline KineticParameters kinetics_from_json(const json& j) {
  return {j.at("k_a").get<double>(), j.at("k_d").get<double>(), j.at("L0").get<double>(),
          j.at("tau_s").get<double>()};
}

inline json grid_to_json(const TimeGrid& g) { return {{"t_start", g.t_start}, {"t_end", g.t_end}, {"step", g.step}}; }

inline TimeGrid grid_from_json(const json& j) {
  return {j.at("t_start").get<double>(), j.at("t_end").get<double>(), j.at("step").get<double>()};
}

inline json state_to_json(const StateSpec& s) {
  if (s.kind == StateKind::TMSD) return {{"kind", std::string(to_string(s.kind))}, {"g", s.g}};
  return std::string(to_string(s.kind));
}

inline StateSpec state_from_json(const json& j) {
  if (j.is_string()) return {parse_state_kind(j.get<std::string>())};
  StateSpec s{parse_state_kind(j.at("kind").get<std::string>())};
  s.g = j.value("g", kDefaultTmsdGain);
  return s;
}

}  // namespace detail

inline nlohmann::json to_json(const ExperimentConfig& c) {
  using detail::json;
  json j;
  j["case"] = c.case_name;
  if (c.stack) j["stack"] = detail::stack_to_json(*c.stack);
  if (c.kinetics) {
    j["kinetics"] = detail::kinetics_to_json(*c.kinetics);
    if (c.angular_amplitude_deg) j["kinetics"]["angular_amplitude_deg"] = *c.angular_amplitude_deg;
  }
  if (c.grid) j["grid"] = detail::grid_to_json(*c.grid);
  if (c.linearize) j["linearize"] = *c.linearize;
  j["scenario"] = {{"mode", std::string(to_string(c.scenario_mode))}, {"eta_a", c.eta_a}};
  if (c.t_mid) j["scenario"]["t_mid"] = *c.t_mid;
  j["states"] = json::array();
  for (const auto& s : c.states) j["states"].push_back(detail::state_to_json(s));
  j["sweeps"] = {{"N", c.N}, {"nu", c.nu}, {"m", c.m}};
  j["p"] = c.p;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["noise_space"] = detail::to_string(c.space);
  j["map"] = {{"T", c.map.T}, {"N", c.map.N}};
  return j;
}

/// Parses a config document. A manifest written by run_experiment is also
/// accepted; its "config" member is used.
inline ExperimentConfig config_from_json(const nlohmann::json& doc) {
  const auto& j = doc.contains("config") ? doc.at("config") : doc;
  ExperimentConfig c;
  try {
    c.case_name = j.value("case", c.case_name);
    if (j.contains("stack")) c.stack = detail::stack_from_json(j.at("stack"));
    if (j.contains("kinetics")) {
      c.kinetics = detail::kinetics_from_json(j.at("kinetics"));
      if (j.at("kinetics").contains("angular_amplitude_deg"))
        c.angular_amplitude_deg = j.at("kinetics").at("angular_amplitude_deg").get<double>();
    }
    if (j.contains("grid")) c.grid = detail::grid_from_json(j.at("grid"));
    if (j.contains("linearize")) c.linearize = j.at("linearize").get<bool>();
    if (j.contains("scenario")) {
      const auto& s = j.at("scenario");
      c.scenario_mode = parse_scenario_mode(s.value("mode", std::string("standard")));
      c.eta_a = s.value("eta_a", 1.0);
      if (s.contains("t_mid")) c.t_mid = s.at("t_mid").get<double>();
    }
    for (const auto& s : j.value("states", detail::json::array())) c.states.push_back(detail::state_from_json(s));
    if (j.contains("sweeps")) {
      const auto& s = j.at("sweeps");
      c.N = s.value("N", std::vector<double>{});
      c.nu = s.value("nu", std::vector<long long>{});
      c.m = s.value("m", std::vector<int>{});
    }
    c.p = j.value("p", c.p);
    c.seed = j.value("seed", c.seed);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.space = detail::parse_noise_space(j.value("noise_space", std::string("measurement")));
    if (j.contains("map")) {
      c.map.T = j.at("map").value("T", std::vector<double>{});
      c.map.N = j.at("map").value("N", std::vector<double>{});
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

inline CaseStudy ExperimentConfig::resolve() const {
  CaseStudy c;
  if (case_name == "custom") {
    if (!stack || !kinetics || !angular_amplitude_deg || !grid)
      throw std::invalid_argument("config: custom case needs stack, kinetics (with angular_amplitude_deg) and grid");
    c.name = "custom";
  } else {
    c = resolve_case(case_name);
  }
  if (stack) c.stack = *stack;
  if (kinetics) c.kinetics = *kinetics;
  if (angular_amplitude_deg) c.angular_amplitude_deg = *angular_amplitude_deg;
  if (grid) c.grid = *grid;
  if (linearize) c.linearize = *linearize;
  c.validate();
  return c;
}

inline void ExperimentConfig::validate() const {
  if (states.empty()) throw std::invalid_argument("config: at least one state is required");
  if (N.empty() || m.empty()) throw std::invalid_argument("config: sweeps need at least one N and one m value");
  if (p < 1) throw std::invalid_argument("config: p must be >= 1");
  for (double n : N)
    if (!(n > 0.0)) throw std::invalid_argument("config: every N must be > 0");
  for (long long v : nu)
    if (v < 1) throw std::invalid_argument("config: every nu must be >= 1");
  for (int v : m)
    if (v < 1) throw std::invalid_argument("config: every m must be >= 1");
  for (double t : map.T)
    if (!(t > 0.0 && t <= 1.0)) throw std::invalid_argument("config: map T values must lie in (0, 1]");
  for (double n : map.N)
    if (!(n > 0.0)) throw std::invalid_argument("config: map N values must be > 0");
  if (!(eta_a > 0.0 && eta_a <= 1.0)) throw std::invalid_argument("config: eta_a must lie in (0, 1]");
  if (t_mid && !(*t_mid >= 0.0 && *t_mid <= 1.0)) throw std::invalid_argument("config: t_mid must lie in [0, 1]");
  for (const auto& s : states)
    for (double n : N) make_probe(s.kind, n, s.g);
  resolve();
}

// ---- results -----------------------------------------------------------

struct ResultRow {
  std::string case_name;
  StateKind state = StateKind::TMC;
  ScenarioMode scenario = ScenarioMode::Standard;
  double N = 0.0;
  long long nu = 0;
  int m = 0;
  int p = 0;
  std::string parameter;
  double estimate = 0.0;
  double precision = 0.0;
  double R_k = 0.0;
  double R_M_midpoint = 0.0;
  std::size_t failed_fits = 0;
  std::size_t total_fits = 0;
  bool unreliable = false;
  std::uint64_t seed = 0;
};

inline constexpr const char* kResultsHeader =
    "case,state,scenario,N,nu,m,p,parameter,estimate,precision,R_k,R_M_midpoint,failed_fits,total_fits,unreliable,seed";

inline std::string fmt_double(double x) { return fmt::format("{:.17g}", x); }

inline std::string to_csv(const ResultRow& r) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}", r.case_name, to_string(r.state),
                     to_string(r.scenario), fmt_double(r.N), r.nu, r.m, r.p, r.parameter, fmt_double(r.estimate),
                     fmt_double(r.precision), fmt_double(r.R_k), fmt_double(r.R_M_midpoint), r.failed_fits,
                     r.total_fits, r.unreliable ? 1 : 0, r.seed);
}

struct RunOptions {
  unsigned threads = 1;
};

struct ExperimentOutcome {
  std::vector<ResultRow> rows;
  std::vector<std::string> unreliable;  // one diagnostic per flagged ensemble
  std::filesystem::path output_dir;
};

namespace detail {

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline std::vector<double> default_map_T() {
  std::vector<double> t;
  for (int i = 1; i <= 99; ++i) t.push_back(i / 100.0);
  return t;
}

inline std::vector<double> default_map_N() { return {10.0, 100.0, 1000.0, 10000.0}; }

struct EnsembleOrError {
  std::optional<TrialEnsembleResult> result;
  std::string error;
};

inline EnsembleOrError try_ensemble(const SimulationPlan& plan, std::span<const double> ideal_T, unsigned threads) {
  try {
    return {run_ensemble(plan, ideal_T, threads), {}};
  } catch (const std::runtime_error& e) {
    return {std::nullopt, e.what()};
  }
}

}  // namespace detail

/// Runs every sweep point and writes sensorgram_ideal.csv,
/// sensorgram_sample.csv, results.csv, midpoint_map_<state>.csv and
/// manifest.json to config.output_dir.
inline ExperimentOutcome run_experiment(const ExperimentConfig& config, const RunOptions& opts = {}) {
  namespace fs = std::filesystem;
  using clock = std::chrono::steady_clock;
  config.validate();
  const auto started = clock::now();

  const CaseStudy study = config.resolve();
  const PreparedCase pc = prepare_case(study);
  const auto& ideal = pc.ideal_T();
  const auto& times = pc.times();
  const double t_mid_case = pc.t_mid;
  SensingScenario scenario{config.scenario_mode, config.eta_a, config.t_mid.value_or(t_mid_case)};
  scenario.validate();
  const std::vector<long long> nus = config.nu.empty() ? std::vector<long long>{study.default_nu} : config.nu;

  ExperimentOutcome outcome;
  outcome.output_dir = config.output_dir;
  fs::create_directories(outcome.output_dir);

  auto plan_for = [&](const ProbeState& state, long long nu, int m) {
    SimulationPlan plan;
    plan.nu = nu;
    plan.m = m;
    plan.p = config.p;
    plan.seed = config.seed;
    plan.state = state;
    plan.scenario = scenario;
    plan.grid = study.grid;
    plan.tau_s = study.kinetics.tau_s;
    plan.L0 = study.kinetics.L0;
    plan.space = config.space;
    return plan;
  };

  // Ideal sensorgram, with <M> for every state at the first N.
  {
    std::string text = "t,theta_deg,n_a,T,T_L";
    for (const auto& s : config.states) text += fmt::format(",M_mean_{}", to_string(s.kind));
    text += '\n';
    const auto& rec = pc.reconstruction;
    for (std::size_t i = 0; i < times.size(); ++i) {
      text += fmt::format("{},{},{},{},{}", fmt_double(times[i]), fmt_double(rec.theta_deg[i]),
                          fmt_double(rec.n_a[i]), fmt_double(rec.T[i]), fmt_double(pc.T_linear[i]));
      for (const auto& s : config.states)
        text += "," + fmt_double(mean_M(make_probe(s.kind, config.N.front(), s.g), ideal[i], scenario));
      text += '\n';
    }
    detail::write_text(outcome.output_dir / "sensorgram_ideal.csv", text);
  }

  // One noisy realisation per state at the first sweep point.
  {
    std::string text = "t";
    for (const auto& s : config.states) text += fmt::format(",M_{}", to_string(s.kind));
    text += '\n';
    std::vector<std::vector<double>> cols;
    for (const auto& s : config.states) {
      const auto plan = plan_for(make_probe(s.kind, config.N.front(), s.g), nus.front(), config.m.front());
      cols.push_back(synthesize_noisy_sensorgram(ideal, plan, Substream{config.seed, 0, 0, 1}));
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
      text += fmt_double(times[i]);
      for (const auto& c : cols) text += "," + fmt_double(c[i]);
      text += '\n';
    }
    detail::write_text(outcome.output_dir / "sensorgram_sample.csv", text);
  }

  // Sweep.
  for (double N : config.N)
    for (long long nu : nus)
      for (int m : config.m) {
        const auto classical = detail::try_ensemble(plan_for(ProbeState::tmc(N), nu, m), ideal, opts.threads);
        for (const auto& s : config.states) {
          const ProbeState probe = make_probe(s.kind, N, s.g);
          const auto plan = plan_for(probe, nu, m);
          const auto run = s.kind == StateKind::TMC ? classical : detail::try_ensemble(plan, ideal, opts.threads);
          const double rm = s.kind == StateKind::TMC ? 1.0 : enhancement_RM(probe, t_mid_case, scenario);
          const auto nan = std::numeric_limits<double>::quiet_NaN();
          PerParameter rk{nan, nan, nan};
          if (run.result && classical.result) rk = detail::precision_ratios(*classical.result, *run.result);

          const std::string where = fmt::format("state={} N={} nu={} m={}", to_string(s.kind), fmt_double(N), nu, m);
          if (!run.result) {
            outcome.unreliable.push_back(where + ": " + run.error);
          } else if (run.result->unreliable) {
            outcome.unreliable.push_back(fmt::format("{}: {} of {} fits failed", where, run.result->failed_fit_count,
                                                     run.result->total_fits));
          }

          auto emit = [&](const char* name, const ParameterSummary* sum, double r_k) {
            ResultRow row;
            row.case_name = study.name;
            row.state = s.kind;
            row.scenario = scenario.mode;
            row.N = N;
            row.nu = nu;
            row.m = m;
            row.p = config.p;
            row.parameter = name;
            row.estimate = sum ? sum->estimate : nan;
            row.precision = sum ? sum->precision : nan;
            row.R_k = r_k;
            row.R_M_midpoint = rm;
            row.total_fits = static_cast<std::size_t>(m) * static_cast<std::size_t>(config.p);
            row.failed_fits = run.result ? run.result->failed_fit_count : row.total_fits;
            row.unreliable = !run.result || run.result->unreliable;
            row.seed = config.seed;
            outcome.rows.push_back(row);
          };
          const auto* r = run.result ? &*run.result : nullptr;
          emit("k_a", r ? &r->k_a : nullptr, rk.k_a);
          emit("k_s", r ? &r->k_s : nullptr, rk.k_s);
          emit("k_d", r ? &r->k_d : nullptr, rk.k_d);
        }
      }

  {
    std::string text = std::string(kResultsHeader) + '\n';
    for (const auto& r : outcome.rows) text += to_csv(r) + '\n';
    detail::write_text(outcome.output_dir / "results.csv", text);
  }

  // Mid-point enhancement maps over (N, T) for each non-classical state.
  const auto map_T = config.map.T.empty() ? detail::default_map_T() : config.map.T;
  const auto map_N = config.map.N.empty() ? detail::default_map_N() : config.map.N;
  for (const auto& s : config.states) {
    if (s.kind == StateKind::TMC) continue;
    std::string text = "N,T,R_M\n";
    for (double n : map_N) {
      if (s.kind == StateKind::TMSD && n < s.g - 1.0) continue;  // no such state
      const auto map = midpoint_enhancement_map(s.kind, scenario, map_T, std::vector<double>{n}, s.g);
      for (std::size_t j = 0; j < map_T.size(); ++j)
        text += fmt::format("{},{},{}\n", fmt_double(n), fmt_double(map_T[j]), fmt_double(map.at(0, j)));
    }
    detail::write_text(outcome.output_dir / fmt::format("midpoint_map_{}.csv", to_string(s.kind)), text);
  }

  const double seconds = std::chrono::duration<double>(clock::now() - started).count();
  nlohmann::json manifest;
  manifest["tool"] = "qspr";
  manifest["version"] = kVersion;
  manifest["results_schema_version"] = kResultsSchemaVersion;
  manifest["config"] = to_json(config);
  manifest["resolved"] = {{"case", study.name},
                          {"stack", detail::stack_to_json(study.stack)},
                          {"kinetics", detail::kinetics_to_json(study.kinetics)},
                          {"angular_amplitude_deg", study.angular_amplitude_deg},
                          {"grid", detail::grid_to_json(study.grid)},
                          {"linearize", study.linearize},
                          {"theta0_deg", study.theta0_deg()},
                          {"t_mid", t_mid_case},
                          {"eta_b", scenario.eta_b()},
                          {"nu", nus}};
  manifest["seed"] = config.seed;
  manifest["unreliable"] = outcome.unreliable;
  manifest["runtime"] = {{"threads", opts.threads}, {"seconds", seconds}};
  detail::write_text(outcome.output_dir / "manifest.json", manifest.dump(2) + '\n');
  return outcome;
}

}  // namespace qspr
