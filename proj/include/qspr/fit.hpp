#pragma once

// Extraction of k_s, k_d (and k_a by closure) from one sensorgram.
//
// The dissociation tail is fitted first to baseline + A_tau e^{-k_d (t - tau)};
// the association phase is then fitted to baseline + A_inf (1 - e^{-k_s t})
// with the baseline held at the tail's value. Rates are optimised as logs
// so they stay positive. Each segment is warm-started from a profile scan:
// for fixed rate the model is linear in its amplitudes, which are solved
// exactly, and the best rate on a log grid seeds Levenberg-Marquardt.

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "qspr/kinetics.hpp"
#include "qspr/levenberg_marquardt.hpp"

namespace qspr {

struct FitResult {
  double k_s = 0.0;
  double k_d = 0.0;
  double k_a = 0.0;
  double baseline = 0.0;
  double amplitude = 0.0;      // A_inf of the association phase
  double amplitude_tau = 0.0;  // A_tau of the dissociation tail
  bool converged = false;
  bool ka_negative = false;
  LmStatus association_status = LmStatus::max_iterations;
  LmStatus dissociation_status = LmStatus::max_iterations;
  int iterations = 0;
  double residual_norm = std::numeric_limits<double>::infinity();
};

namespace detail {

inline constexpr double kRateGridLo = -5.0;  // log10 s^-1
inline constexpr double kRateGridHi = 1.0;
inline constexpr int kRateGridPoints = 121;

// y = b + A exp(-exp(u) (t - tau)); parameters (b, A, u).
struct DissociationModel {
  std::span<const double> t;
  std::span<const double> y;
  double tau = 0.0;

  Eigen::Index residual_count() const { return static_cast<Eigen::Index>(t.size()); }
  void evaluate(const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd* J) const {
    const double k = std::exp(p[2]);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double dt = t[i] - tau;
      const double e = std::exp(-k * dt);
      const auto ii = static_cast<Eigen::Index>(i);
      r[ii] = p[0] + p[1] * e - y[i];
      if (J) {
        (*J)(ii, 0) = 1.0;
        (*J)(ii, 1) = e;
        (*J)(ii, 2) = -p[1] * dt * k * e;
      }
    }
  }
};

// y = baseline + A (1 - exp(-exp(v) t)); parameters (A, v).
struct AssociationModel {
  std::span<const double> t;
  std::span<const double> y;
  double baseline = 0.0;

  Eigen::Index residual_count() const { return static_cast<Eigen::Index>(t.size()); }
  void evaluate(const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd* J) const {
    const double k = std::exp(p[1]);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double e = std::exp(-k * t[i]);
      const auto ii = static_cast<Eigen::Index>(i);
      r[ii] = baseline + p[0] * (1.0 - e) - y[i];
      if (J) {
        (*J)(ii, 0) = 1.0 - e;
        (*J)(ii, 1) = p[0] * t[i] * k * e;
      }
    }
  }
};

inline double rate_grid(int i) {
  return std::pow(10.0, kRateGridLo + (kRateGridHi - kRateGridLo) * i / (kRateGridPoints - 1));
}

inline Eigen::VectorXd dissociation_warm_start(std::span<const double> t, std::span<const double> y, double tau) {
  double best_sse = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best(3);
  best << y.back(), y.front() - y.back(), std::log(1e-2);
  const double n = static_cast<double>(t.size());
  for (int g = 0; g < kRateGridPoints; ++g) {
    const double k = rate_grid(g);
    double sf = 0.0, sff = 0.0, sy = 0.0, sfy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double f = std::exp(-k * (t[i] - tau));
      sf += f;
      sff += f * f;
      sy += y[i];
      sfy += f * y[i];
      syy += y[i] * y[i];
    }
    const double det = n * sff - sf * sf;
    if (!(det > 1e-12 * n * sff)) continue;
    const double A = (n * sfy - sf * sy) / det;
    const double b = (sy - A * sf) / n;
    const double sse = syy - b * sy - A * sfy;
    if (sse < best_sse) {
      best_sse = sse;
      best << b, A, std::log(k);
    }
  }
  return best;
}

inline Eigen::VectorXd association_warm_start(std::span<const double> t, std::span<const double> y,
                                              double baseline) {
  double best_sse = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best(2);
  best << y.back() - baseline, std::log(1e-2);
  for (int g = 0; g < kRateGridPoints; ++g) {
    const double k = rate_grid(g);
    double sff = 0.0, sfz = 0.0, szz = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double f = 1.0 - std::exp(-k * t[i]);
      const double z = y[i] - baseline;
      sff += f * f;
      sfz += f * z;
      szz += z * z;
    }
    if (!(sff > 0.0)) continue;
    const double A = sfz / sff;
    const double sse = szz - A * sfz;
    if (sse < best_sse) {
      best_sse = sse;
      best << A, std::log(k);
    }
  }
  return best;
}

}  // namespace detail

/// Fits one sensorgram sampled at `times` with values `values`. `tau_s` is
/// the (known) injection switch time and `L0` the ligand concentration used
/// to close k_a = (k_s - k_d) / L0.
inline FitResult fit_sensorgram(std::span<const double> times, std::span<const double> values, double tau_s,
                                double L0, const FitConfig& cfg = {}) {
  if (times.size() != values.size()) throw std::invalid_argument("fit_sensorgram: length mismatch");
  std::size_t split = 0;
  while (split < times.size() && times[split] < tau_s) ++split;
  if (split < 2 || times.size() - split < 3)
    throw std::invalid_argument("fit_sensorgram: samples must cover both the association and dissociation phases");

  const auto t_assoc = times.first(split);
  const auto y_assoc = values.first(split);
  const auto t_dissoc = times.subspan(split);
  const auto y_dissoc = values.subspan(split);

  FitResult res;
  const detail::DissociationModel dm{t_dissoc, y_dissoc, tau_s};
  const LmResult d = lm_solve(dm, detail::dissociation_warm_start(t_dissoc, y_dissoc, tau_s), cfg);
  res.dissociation_status = d.status;
  res.baseline = d.params[0];
  res.amplitude_tau = d.params[1];
  res.k_d = std::exp(d.params[2]);

  const detail::AssociationModel am{t_assoc, y_assoc, res.baseline};
  const LmResult a = lm_solve(am, detail::association_warm_start(t_assoc, y_assoc, res.baseline), cfg);
  res.association_status = a.status;
  res.amplitude = a.params[0];
  res.k_s = std::exp(a.params[1]);

  const auto closure = close_ka(res.k_s, res.k_d, L0);
  res.k_a = closure.k_a;
  res.ka_negative = closure.negative;
  res.iterations = d.iterations + a.iterations;
  res.residual_norm = std::hypot(d.residual_norm, a.residual_norm);
  res.converged = d.converged() && a.converged() && std::isfinite(res.k_s) && std::isfinite(res.k_d);
  return res;
}

}  // namespace qspr
