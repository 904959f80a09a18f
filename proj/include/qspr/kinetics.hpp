#pragma once

// Pseudo-first-order ligand/receptor binding and the piecewise-exponential
// sensorgram it produces, plus reconstruction of an intensity-interrogation
// sensorgram from an angular one.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "qspr/optics.hpp"

namespace qspr {

struct KineticParameters {
  double k_a = 0.0;    // M^-1 s^-1
  double k_d = 0.0;    // s^-1
  double L0 = 0.0;     // M
  double tau_s = 0.0;  // injection switch time, s

  void validate() const {
    if (!(k_a > 0.0 && k_d > 0.0 && L0 > 0.0 && tau_s > 0.0))
      throw std::invalid_argument("KineticParameters: k_a, k_d, L0 and tau_s must all be > 0");
  }
  double k_s() const { return k_a * L0 + k_d; }
  double K_D() const { return k_d / k_a; }
  double K_A() const { return k_a / k_d; }
};

/// baseline + amplitude_inf (1 - e^{-k_s t}) before tau, exponential
/// decay at rate k_d from the value reached at tau afterwards.
struct SensorgramShape {
  double baseline = 0.0;
  double amplitude_inf = 0.0;
  double k_s = 0.0;
  double k_d = 0.0;
  double tau_s = 0.0;

  void validate() const {
    if (!(amplitude_inf > 0.0)) throw std::invalid_argument("SensorgramShape: amplitude_inf must be > 0");
    if (!(k_s > 0.0 && k_d > 0.0 && tau_s > 0.0))
      throw std::invalid_argument("SensorgramShape: k_s, k_d and tau_s must be > 0");
  }
  double amplitude_at_tau() const { return amplitude_inf * (1.0 - std::exp(-k_s * tau_s)); }
};

struct TimeGrid {
  double t_start = 0.0;
  double t_end = 0.0;
  double step = 1.0;

  void validate() const {
    if (!(step > 0.0)) throw std::invalid_argument("TimeGrid: step must be > 0");
    if (!(t_end > t_start)) throw std::invalid_argument("TimeGrid: t_end must exceed t_start");
  }
  std::size_t size() const {
    return static_cast<std::size_t>(std::floor((t_end - t_start) / step + 1e-9)) + 1;
  }
  // t_start + i*step rather than accumulation, so grids compare exactly.
  std::vector<double> points() const {
    validate();
    std::vector<double> t(size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = t_start + static_cast<double>(i) * step;
    return t;
  }
  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

/// Receptor-ligand complex concentration [C](t) in the pseudo-first-order
/// limit L0 >> R0 (not checked).
inline double complex_concentration(double t, const KineticParameters& kp, double R0) {
  kp.validate();
  if (!(t >= 0.0)) throw std::invalid_argument("complex_concentration: t must be >= 0");
  const double plateau = kp.L0 * R0 / (kp.L0 + kp.K_D());
  const double ks = kp.k_s();
  if (t < kp.tau_s) return plateau * (1.0 - std::exp(-ks * t));
  const double at_tau = plateau * (1.0 - std::exp(-ks * kp.tau_s));
  return at_tau * std::exp(-kp.k_d * (t - kp.tau_s));
}

inline double ideal_sensorgram(double t, const SensorgramShape& shape) {
  if (!(t >= 0.0)) throw std::invalid_argument("ideal_sensorgram: t must be >= 0");
  if (t < shape.tau_s) return shape.baseline + shape.amplitude_inf * (1.0 - std::exp(-shape.k_s * t));
  return shape.baseline + shape.amplitude_at_tau() * std::exp(-shape.k_d * (t - shape.tau_s));
}

/// Angular sensorgram mapped through the optics onto transmittance. The
/// analyte index trace is kept so linearisation need not invert the optics.
struct Reconstruction {
  std::vector<double> t;
  std::vector<double> theta_deg;
  std::vector<double> n_a;
  std::vector<double> T;
};

/// `angular.baseline` is the resonance angle theta(0) in degrees and
/// `angular.amplitude_inf` the asymptotic angle shift in degrees.
inline Reconstruction reconstruct_transmittance_sensorgram(const SensorgramShape& angular,
                                                           const OpticalStack& stack, const TimeGrid& grid) {
  stack.validate();
  Reconstruction rec;
  rec.t = grid.points();
  const std::size_t n = rec.t.size();
  rec.theta_deg.resize(n);
  rec.n_a.resize(n);
  rec.T.resize(n);
  const double eps_re = stack.eps_metal.real();
  for (std::size_t i = 0; i < n; ++i) {
    rec.theta_deg[i] = ideal_sensorgram(rec.t[i], angular);
    rec.n_a[i] = index_from_angle(rec.theta_deg[i], eps_re, stack.n_prism);
    rec.T[i] = transmittance(stack, AnalyteIndex{rec.n_a[i]});
  }
  return rec;
}

/// Index of the grid point closest to `t`.
inline std::size_t nearest_index(std::span<const double> times, double t) {
  if (times.empty()) throw std::invalid_argument("nearest_index: empty time grid");
  std::size_t best = 0;
  for (std::size_t i = 1; i < times.size(); ++i)
    if (std::abs(times[i] - t) < std::abs(times[best] - t)) best = i;
  return best;
}

/// Linear calibration of transmittance against n_a^2, pinned at t = 0 and
/// t = tau:
///   T_L(t) = T(0) + (T(tau) - T(0)) / (n_a^2(tau) - n_a^2(0)) * (n_a^2(t) - n_a^2(0)).
inline std::vector<double> linearize_sensorgram(std::span<const double> times, std::span<const double> T,
                                                std::span<const double> n_a, double tau_s) {
  if (times.size() != T.size() || times.size() != n_a.size())
    throw std::invalid_argument("linearize_sensorgram: sequences must share the time grid");
  const std::size_t k = nearest_index(times, tau_s);
  const double e0 = n_a[0] * n_a[0];
  const double de = n_a[k] * n_a[k] - e0;
  if (de == 0.0) throw std::domain_error("linearize_sensorgram: zero index deviation between t=0 and tau");
  const double slope = (T[k] - T[0]) / de;
  std::vector<double> out(T.size());
  for (std::size_t i = 0; i < T.size(); ++i) out[i] = T[0] + slope * (n_a[i] * n_a[i] - e0);
  out[0] = T[0];
  out[k] = T[k];
  return out;
}

/// Calibration factor C(T) = T_L / T at each grid point.
inline std::vector<double> calibration_factor(std::span<const double> T, std::span<const double> T_L) {
  if (T.size() != T_L.size()) throw std::invalid_argument("calibration_factor: length mismatch");
  std::vector<double> c(T.size());
  for (std::size_t i = 0; i < T.size(); ++i) c[i] = T_L[i] / T[i];
  return c;
}

struct AssociationClosure {
  double k_a = 0.0;
  bool negative = false;  // noise can push k_s below k_d
};

inline AssociationClosure close_ka(double k_s, double k_d, double L0) {
  if (!(L0 > 0.0)) throw std::invalid_argument("close_ka: L0 must be > 0");
  const double ka = (k_s - k_d) / L0;
  return {ka, ka < 0.0};
}

}  // namespace qspr
