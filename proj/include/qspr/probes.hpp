#pragma once

// Probe states, the intensity-difference measurement M = N_a - N_b, and
// the closed-form moments used to turn measurement noise into a
// transmittance-estimation precision.

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace qspr {

enum class StateKind { TMC, TMF, TMSV, TMSD };

inline std::string_view to_string(StateKind k) {
  switch (k) {
    case StateKind::TMC: return "TMC";
    case StateKind::TMF: return "TMF";
    case StateKind::TMSV: return "TMSV";
    case StateKind::TMSD: return "TMSD";
  }
  return "?";
}

inline StateKind parse_state_kind(std::string_view s) {
  if (s == "TMC" || s == "tmc") return StateKind::TMC;
  if (s == "TMF" || s == "tmf") return StateKind::TMF;
  if (s == "TMSV" || s == "tmsv") return StateKind::TMSV;
  if (s == "TMSD" || s == "tmsd") return StateKind::TMSD;
  throw std::invalid_argument("unknown probe state '" + std::string(s) + "' (expected TMC, TMF, TMSV or TMSD)");
}

inline constexpr double kDefaultTmsdGain = 4.5;

/// Two-mode probe. Every kind carries N photons on average in the signal
/// mode a. For TMC the reference mode holds `beta_sq`; for TMSD
/// `alpha_sq = (N - (G - 1)) / G` and the reference mode holds N - alpha_sq.
struct ProbeState {
  StateKind kind = StateKind::TMC;
  double n_mean = 0.0;
  double g = kDefaultTmsdGain;  // cosh^2 r, TMSD only
  double alpha_sq = 0.0;
  double beta_sq = 0.0;        // TMC reference-mode intensity
  double squeeze_phase = 0.0;  // carried for completeness; no moment depends on it

  static ProbeState tmc(double n) { return tmc(n, n); }
  static ProbeState tmc(double n_signal, double n_reference) {
    ProbeState s{StateKind::TMC, n_signal};
    s.alpha_sq = n_signal;
    s.beta_sq = n_reference;
    s.validate();
    return s;
  }
  static ProbeState tmf(double n) {
    ProbeState s{StateKind::TMF, n};
    s.validate();
    return s;
  }
  static ProbeState tmsv(double n) {
    ProbeState s{StateKind::TMSV, n};
    s.validate();
    return s;
  }
  static ProbeState tmsv_from_squeezing(double r) { return tmsv(std::sinh(r) * std::sinh(r)); }
  static ProbeState tmsd(double n, double g = kDefaultTmsdGain) {
    ProbeState s{StateKind::TMSD, n, g};
    s.alpha_sq = (n - (g - 1.0)) / g;
    s.validate();
    return s;
  }
  /// TMSD built from the displacement and squeezing directly.
  static ProbeState tmsd_from(double alpha_sq, double g) {
    return tmsd(g * alpha_sq + (g - 1.0), g);
  }
  /// Same kind and parameters, different signal photon number.
  ProbeState with_photons(double n) const;

  void validate() const {
    if (!(n_mean > 0.0)) throw std::invalid_argument("ProbeState: n_mean must be > 0");
    if (kind == StateKind::TMC && !(beta_sq >= 0.0))
      throw std::invalid_argument("ProbeState: TMC reference intensity must be >= 0");
    if (kind == StateKind::TMSD) {
      if (!(g > 1.0)) throw std::invalid_argument("ProbeState: TMSD requires G = cosh^2 r > 1");
      if (!(alpha_sq >= -1e-12))
        throw std::invalid_argument("ProbeState: TMSD needs N >= G - 1 so that |alpha|^2 >= 0 (N=" +
                                    std::to_string(n_mean) + ", G=" + std::to_string(g) + ")");
    }
  }

  /// Squeezing magnitude r (TMSV: sinh^2 r = N; TMSD: cosh^2 r = G).
  double squeezing() const {
    if (kind == StateKind::TMSV) return std::asinh(std::sqrt(n_mean));
    if (kind == StateKind::TMSD) return std::acosh(std::sqrt(g));
    return 0.0;
  }
  double signal_photons() const { return n_mean; }
  double reference_photons() const {
    switch (kind) {
      case StateKind::TMC: return beta_sq;
      case StateKind::TMSD: return n_mean - alpha_sq;
      default: return n_mean;
    }
  }
};

inline ProbeState make_probe(StateKind kind, double n, double g = kDefaultTmsdGain) {
  switch (kind) {
    case StateKind::TMC: return ProbeState::tmc(n);
    case StateKind::TMF: return ProbeState::tmf(n);
    case StateKind::TMSV: return ProbeState::tmsv(n);
    case StateKind::TMSD: return ProbeState::tmsd(n, g);
  }
  throw std::invalid_argument("make_probe: unknown state kind");
}

inline ProbeState ProbeState::with_photons(double n) const { return make_probe(kind, n, g); }

enum class ScenarioMode { Standard, Optimized, SingleMode };

inline std::string_view to_string(ScenarioMode m) {
  switch (m) {
    case ScenarioMode::Standard: return "standard";
    case ScenarioMode::Optimized: return "optimized";
    case ScenarioMode::SingleMode: return "single_mode";
  }
  return "?";
}

inline ScenarioMode parse_scenario_mode(std::string_view s) {
  if (s == "standard") return ScenarioMode::Standard;
  if (s == "optimized") return ScenarioMode::Optimized;
  if (s == "single_mode" || s == "single-mode" || s == "single") return ScenarioMode::SingleMode;
  throw std::invalid_argument("unknown sensing scenario '" + std::string(s) +
                              "' (expected standard, optimized or single_mode)");
}

/// Transmissivities of the signal and reference arms.
struct Losses {
  double eta_a = 1.0;
  double eta_b = 1.0;
};

/// Loss configuration. Optimized sensing attenuates the reference mode to
/// match the signal mode at the fixed mid-point transmittance.
struct SensingScenario {
  ScenarioMode mode = ScenarioMode::Standard;
  double eta_a = 1.0;
  double t_mid = 0.5;

  static SensingScenario standard(double eta = 1.0) { return {ScenarioMode::Standard, eta, 0.5}; }
  static SensingScenario optimized(double eta_a, double t_mid) { return {ScenarioMode::Optimized, eta_a, t_mid}; }
  static SensingScenario single_mode(double eta_a = 1.0) { return {ScenarioMode::SingleMode, eta_a, 0.5}; }

  void validate() const {
    if (!(eta_a > 0.0 && eta_a <= 1.0)) throw std::invalid_argument("SensingScenario: eta_a must lie in (0, 1]");
    if (mode == ScenarioMode::Optimized && !(t_mid >= 0.0 && t_mid <= 1.0))
      throw std::invalid_argument("SensingScenario: t_mid must lie in [0, 1]");
  }
  double eta_b() const {
    switch (mode) {
      case ScenarioMode::Standard: return eta_a;
      case ScenarioMode::Optimized: return eta_a * t_mid;
      case ScenarioMode::SingleMode: return 0.0;
    }
    return eta_a;
  }
  Losses losses() const { return {eta_a, eta_b()}; }
  friend bool operator==(const SensingScenario&, const SensingScenario&) = default;
};

namespace detail {

inline void check_transmittance(double T) {
  if (!(T >= 0.0 && T <= 1.0)) throw std::invalid_argument("transmittance must lie in [0, 1]");
}

// Variance of M for the squeezed-displaced state after the sensor and the
// two loss channels, in terms of G = cosh^2 r and |alpha|^2.
inline double tmsd_variance(double T, double eta_a, double eta_b, double G, double a2) {
  const double ta = T * eta_a;
  const double g1 = G - 1.0;
  return 2.0 * ta * ta * G * g1 * a2 + ta * ta * g1 * g1 + ta * (G * a2 + g1) + 2.0 * eta_b * eta_b * g1 * g1 * a2 +
         eta_b * eta_b * g1 * g1 + eta_b * (g1 * a2 + g1) - 4.0 * ta * eta_b * G * g1 * a2 -
         2.0 * ta * eta_b * G * g1;
}

}  // namespace detail

/// <M> for the state after the sensor and loss channels.
inline double mean_M(const ProbeState& state, double T, Losses loss) {
  detail::check_transmittance(T);
  return loss.eta_a * T * state.signal_photons() - loss.eta_b * state.reference_photons();
}

inline double mean_M(const ProbeState& state, double T, const SensingScenario& sc) {
  return mean_M(state, T, sc.losses());
}

/// Standard deviation of M.
inline double delta_M(const ProbeState& state, double T, Losses loss) {
  detail::check_transmittance(T);
  const double ea = loss.eta_a;
  const double eb = loss.eta_b;
  const double N = state.n_mean;
  double var = 0.0;
  switch (state.kind) {
    case StateKind::TMC: var = ea * T * state.signal_photons() + eb * state.reference_photons(); break;
    case StateKind::TMF: var = N * (ea * T * (1.0 - ea * T) + eb * (1.0 - eb)); break;
    case StateKind::TMSV: {
      const double d = T * ea - eb;
      var = N * (d * d * N + eb + T * ea * (1.0 - 2.0 * eb));
      break;
    }
    case StateKind::TMSD: var = detail::tmsd_variance(T, ea, eb, state.g, state.alpha_sq); break;
  }
  return std::sqrt(std::max(var, 0.0));
}

inline double delta_M(const ProbeState& state, double T, const SensingScenario& sc) {
  return delta_M(state, T, sc.losses());
}

/// Leading-order TMSD noise for |alpha|^2 >> 1.
inline double delta_M_tmsd_bright(double T, double eta_a, double eta_b, double G, double alpha_sq) {
  const double ta = T * eta_a;
  const double d = ta - eta_b;
  const double inner = ta * G + eta_b * (G - 1.0) + 2.0 * (G - 1.0) * (G * d * d - eta_b * eta_b);
  return std::sqrt(alpha_sq) * std::sqrt(inner);
}

/// |d<M>/dT|; <M> is affine in T with slope eta_a N for every state.
inline double sensitivity(const ProbeState& state, const SensingScenario& sc) {
  return sc.eta_a * state.signal_photons();
}

/// Precision of the sample-mean transmittance estimate from nu shots.
inline double delta_T(const ProbeState& state, double T, const SensingScenario& sc, long long nu) {
  if (nu < 1) throw std::invalid_argument("delta_T: nu must be >= 1");
  return delta_M(state, T, sc) / sensitivity(state, sc) / std::sqrt(static_cast<double>(nu));
}

/// Classical reference with the same mean photon number in each mode.
inline ProbeState matched_coherent_reference(const ProbeState& state) {
  return ProbeState::tmc(state.signal_photons(), state.reference_photons());
}

/// R_M = Delta M of the matched TMC reference over Delta M of `state`.
inline double enhancement_RM(const ProbeState& state, double T, const SensingScenario& sc) {
  if (state.kind == StateKind::TMC) throw std::invalid_argument("enhancement_RM: state must not be TMC");
  return delta_M(matched_coherent_reference(state), T, sc) / delta_M(state, T, sc);
}

/// Noise reduction factor, 1 / R_M^2.
inline double noise_reduction_factor(const ProbeState& state, double T, const SensingScenario& sc) {
  const double r = enhancement_RM(state, T, sc);
  return 1.0 / (r * r);
}

/// R_M tabulated over (N, T); `values[i * T.size() + j]` belongs to
/// (N[i], T[j]).
struct EnhancementMap {
  StateKind kind = StateKind::TMF;
  std::vector<double> T;
  std::vector<double> N;
  std::vector<double> values;

  double at(std::size_t n_index, std::size_t t_index) const { return values[n_index * T.size() + t_index]; }
};

inline EnhancementMap midpoint_enhancement_map(StateKind kind, const SensingScenario& sc,
                                               std::span<const double> T_range, std::span<const double> N_range,
                                               double g = kDefaultTmsdGain) {
  if (T_range.empty() || N_range.empty()) throw std::invalid_argument("midpoint_enhancement_map: empty range");
  EnhancementMap map{kind, {T_range.begin(), T_range.end()}, {N_range.begin(), N_range.end()}, {}};
  map.values.reserve(T_range.size() * N_range.size());
  for (double n : N_range) {
    const ProbeState probe = make_probe(kind, n, g);
    for (double t : T_range) map.values.push_back(enhancement_RM(probe, t, sc));
  }
  return map;
}

}  // namespace qspr
