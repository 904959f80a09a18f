#pragma once

// Built-in binding experiments and the noise-free pipeline that turns an
// angular sensorgram into the transmittance sensorgram used for simulation.

#include <string>
#include <string_view>
#include <vector>

#include "qspr/fit.hpp"
#include "qspr/kinetics.hpp"
#include "qspr/optics.hpp"

namespace qspr {

inline constexpr double kBufferIndexPbs = 1.3385;

struct CaseStudy {
  std::string name;
  OpticalStack stack;
  KineticParameters kinetics;
  double angular_amplitude_deg = 0.0;  // A_inf of the angular sensorgram
  double buffer_index = kBufferIndexPbs;
  TimeGrid grid;
  bool linearize = true;  // calibrate T against n_a^2 before simulating
  long long default_nu = 100;

  /// Resonance angle for the buffer, the angular sensorgram's baseline.
  double theta0_deg() const { return resonance_angle(buffer_index, stack.eps_metal.real(), stack.n_prism); }

  SensorgramShape angular_shape() const {
    return {theta0_deg(), angular_amplitude_deg, kinetics.k_s(), kinetics.k_d, kinetics.tau_s};
  }

  void validate() const {
    stack.validate();
    kinetics.validate();
    grid.validate();
    if (!(angular_amplitude_deg > 0.0)) throw std::invalid_argument("CaseStudy: angular amplitude must be > 0");
    if (!(kinetics.tau_s > grid.t_start && kinetics.tau_s < grid.t_end))
      throw std::invalid_argument("CaseStudy: tau must fall inside the time grid");
  }
};

/// BSA / anti-BSA IgG1, large sensor response (Autolab ESPRIT, 670 nm).
inline CaseStudy kausaite2007() {
  CaseStudy c;
  c.name = "kausaite2007";
  c.stack = {670.0, 1.5107, {-14.358, 1.0440}, 50.0, 70.1200};
  c.kinetics = {9.36e3, 7.85e-3, 274e-9, 1100.0};
  c.angular_amplitude_deg = 0.800;
  c.grid = {0.0, 2200.0, 10.0};
  c.linearize = true;
  c.default_nu = 100;
  return c;
}

/// Carbonic anhydrase / benzenesulfonamide, small sensor response
/// (BIAcore 1000, 760 nm).
inline CaseStudy lahiri1999() {
  CaseStudy c;
  c.name = "lahiri1999";
  c.stack = {760.0, 1.523, {-20.913, 1.2923}, 38.0, 66.21};
  c.kinetics = {3.8e-3, 15e-3, 2.1, 300.0};
  c.angular_amplitude_deg = 0.0291;
  c.grid = {0.0, 1000.0, 5.0};
  c.linearize = false;
  c.default_nu = 100000;
  return c;
}

inline std::vector<std::string> available_cases() { return {"kausaite2007", "lahiri1999"}; }

inline CaseStudy resolve_case(std::string_view name) {
  if (name == "kausaite2007") return kausaite2007();
  if (name == "lahiri1999") return lahiri1999();
  std::string msg = "unknown case '" + std::string(name) + "'; available:";
  for (const auto& n : available_cases()) msg += " " + n;
  throw std::invalid_argument(msg);
}

/// Output of the noise-free pipeline for one case.
struct PreparedCase {
  CaseStudy study;
  Reconstruction reconstruction;
  std::vector<double> T_linear;  // T_L (equals T when the case is not linearised)
  std::size_t tau_index = 0;
  double t_mid = 0.0;            // (T(0) + T(tau)) / 2 of the simulated sensorgram
  FitResult noise_free_fit;

  /// Transmittance sensorgram fed to the Monte Carlo engine.
  const std::vector<double>& ideal_T() const { return study.linearize ? T_linear : reconstruction.T; }
  const std::vector<double>& times() const { return reconstruction.t; }
};

inline PreparedCase prepare_case(const CaseStudy& study, const FitConfig& cfg = {}) {
  study.validate();
  PreparedCase pc;
  pc.study = study;
  pc.reconstruction = reconstruct_transmittance_sensorgram(study.angular_shape(), study.stack, study.grid);
  const auto& rec = pc.reconstruction;
  pc.T_linear = linearize_sensorgram(rec.t, rec.T, rec.n_a, study.kinetics.tau_s);
  pc.tau_index = nearest_index(rec.t, study.kinetics.tau_s);
  const auto& T = pc.ideal_T();
  pc.t_mid = 0.5 * (T.front() + T[pc.tau_index]);
  pc.noise_free_fit = fit_sensorgram(rec.t, T, study.kinetics.tau_s, study.kinetics.L0, cfg);
  return pc;
}

}  // namespace qspr
