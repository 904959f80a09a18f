#pragma once

// Brute-force photon statistics in a truncated two-mode Fock basis. This is
// the independent check on the closed-form moments in probes.hpp: states
// are built directly in the number basis (squeezed-displaced states by
// exponentiating the two-mode squeezing generator), losses are exact
// binomial thinning, and moments come from direct summation.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "qspr/philox.hpp"
#include "qspr/probes.hpp"

namespace qspr::oracle {

using complex = std::complex<double>;

inline constexpr double kDefaultTailTolerance = 1e-10;

/// Amplitudes c(n_a, n_b) for 0 <= n_a, n_b <= cutoff, row-major in n_a.
struct TruncatedTwoModeState {
  int cutoff = 0;
  std::vector<complex> amplitudes;
  double tail_mass = 0.0;

  std::size_t dim() const { return static_cast<std::size_t>(cutoff) + 1; }
  complex& at(int na, int nb) { return amplitudes[static_cast<std::size_t>(na) * dim() + nb]; }
  const complex& at(int na, int nb) const { return amplitudes[static_cast<std::size_t>(na) * dim() + nb]; }
  double norm() const {
    double s = 0.0;
    for (const auto& c : amplitudes) s += std::norm(c);
    return s;
  }
};

struct JointPhotonDistribution {
  int cutoff = 0;
  std::vector<double> probabilities;
  double tail_mass = 0.0;

  std::size_t dim() const { return static_cast<std::size_t>(cutoff) + 1; }
  double at(int na, int nb) const { return probabilities[static_cast<std::size_t>(na) * dim() + nb]; }
  double& at(int na, int nb) { return probabilities[static_cast<std::size_t>(na) * dim() + nb]; }
  double total() const {
    double s = 0.0;
    for (double p : probabilities) s += p;
    return s;
  }
};

namespace detail {

inline std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

inline TruncatedTwoModeState empty_state(int cutoff) {
  if (cutoff < 0) throw std::invalid_argument("cutoff must be >= 0");
  TruncatedTwoModeState s;
  s.cutoff = cutoff;
  s.amplitudes.assign(s.dim() * s.dim(), complex{});
  return s;
}

inline std::vector<double> coherent_amplitudes(double mean, int cutoff) {
  std::vector<double> c(static_cast<std::size_t>(cutoff) + 1);
  const double alpha = std::sqrt(mean);
  c[0] = std::exp(-0.5 * mean);
  for (int n = 1; n <= cutoff; ++n) c[n] = c[n - 1] * alpha / std::sqrt(static_cast<double>(n));
  return c;
}

inline double finalize_tail(TruncatedTwoModeState& s) {
  s.tail_mass = std::max(0.0, 1.0 - s.norm());
  return s.tail_mass;
}

// out = K psi with K = chi^* a b - chi a^dag b^dag, chi = r e^{i phase}.
inline void apply_squeeze_generator(const TruncatedTwoModeState& psi, complex chi, TruncatedTwoModeState& out) {
  const int c = psi.cutoff;
  std::fill(out.amplitudes.begin(), out.amplitudes.end(), complex{});
  for (int na = 0; na <= c; ++na) {
    for (int nb = 0; nb <= c; ++nb) {
      const complex v = psi.at(na, nb);
      if (v == complex{}) continue;
      if (na > 0 && nb > 0) out.at(na - 1, nb - 1) += std::conj(chi) * std::sqrt(double(na) * nb) * v;
      if (na < c && nb < c) out.at(na + 1, nb + 1) -= chi * std::sqrt(double(na + 1) * (nb + 1)) * v;
    }
  }
}

// psi <- exp(K) psi by Taylor series over sub-steps small enough that each
// series converges to machine precision.
inline void exponentiate_squeeze(TruncatedTwoModeState& psi, double r, double phase) {
  const int steps = std::max(1, static_cast<int>(std::ceil(r / 0.05)));
  const complex chi = std::polar(r / steps, phase);
  TruncatedTwoModeState term = psi;
  TruncatedTwoModeState next = psi;
  for (int s = 0; s < steps; ++s) {
    term = psi;
    for (int k = 1; k < 200; ++k) {
      apply_squeeze_generator(term, chi, next);
      double tn = 0.0;
      for (std::size_t i = 0; i < next.amplitudes.size(); ++i) {
        next.amplitudes[i] /= static_cast<double>(k);
        psi.amplitudes[i] += next.amplitudes[i];
        tn += std::norm(next.amplitudes[i]);
      }
      std::swap(term, next);
      if (tn < 1e-36) break;
    }
  }
}

inline TruncatedTwoModeState squeezed_displaced(double alpha_sq, double r, double phase, int cutoff) {
  TruncatedTwoModeState s = empty_state(cutoff);
  const auto coh = coherent_amplitudes(alpha_sq, cutoff);
  for (int na = 0; na <= cutoff; ++na) s.at(na, 0) = coh[na];
  exponentiate_squeeze(s, r, phase);
  return s;
}

}  // namespace detail

/// Number-basis representation of `state` truncated at `cutoff` photons
/// per mode. Throws if the probability outside the box exceeds `tolerance`.
inline TruncatedTwoModeState build_state(const ProbeState& state, int cutoff,
                                         double tolerance = kDefaultTailTolerance) {
  state.validate();
  TruncatedTwoModeState s = detail::empty_state(cutoff);
  switch (state.kind) {
    case StateKind::TMC: {
      const auto ca = detail::coherent_amplitudes(state.signal_photons(), cutoff);
      const auto cb = detail::coherent_amplitudes(state.reference_photons(), cutoff);
      for (int na = 0; na <= cutoff; ++na)
        for (int nb = 0; nb <= cutoff; ++nb) s.at(na, nb) = ca[na] * cb[nb];
      detail::finalize_tail(s);
      break;
    }
    case StateKind::TMF: {
      const double n = std::round(state.n_mean);
      if (std::abs(n - state.n_mean) > 1e-12)
        throw std::invalid_argument("build_state: TMF photon number must be an integer");
      if (n > cutoff) {
        s.tail_mass = 1.0;
      } else {
        s.at(static_cast<int>(n), static_cast<int>(n)) = 1.0;
        s.tail_mass = 0.0;
      }
      break;
    }
    case StateKind::TMSV: {
      // exp(chi^* ab - chi a^dag b^dag)|00> = sum_n (-e^{i phase} tanh r)^n / cosh r |nn>
      const double r = state.squeezing();
      const double lambda = std::tanh(r);
      const complex step = -std::polar(lambda, state.squeeze_phase);
      complex c = 1.0 / std::cosh(r);
      for (int n = 0; n <= cutoff; ++n) {
        s.at(n, n) = c;
        c *= step;
      }
      s.tail_mass = std::pow(lambda, 2.0 * (cutoff + 1));
      break;
    }
    case StateKind::TMSD: {
      const double r = state.squeezing();
      const double a2 = std::max(state.alpha_sq, 0.0);
      // Evolve in a larger box and compare against the requested one: the
      // generator is truncated, so agreement is the convergence evidence.
      const int wide = cutoff + std::max(10, cutoff / 2);
      const auto big = detail::squeezed_displaced(a2, r, state.squeeze_phase, wide);
      const auto small = detail::squeezed_displaced(a2, r, state.squeeze_phase, cutoff);
      double disagreement = 0.0;
      for (int na = 0; na <= cutoff; ++na)
        for (int nb = 0; nb <= cutoff; ++nb) {
          s.at(na, nb) = big.at(na, nb);
          disagreement += std::norm(big.at(na, nb) - small.at(na, nb));
        }
      detail::finalize_tail(s);
      s.tail_mass = std::max(s.tail_mass, disagreement);
      break;
    }
  }
  if (s.tail_mass > tolerance) {
    throw std::domain_error("build_state: cutoff " + std::to_string(cutoff) + " leaves tail mass " +
                            detail::sci(s.tail_mass) + " for " + std::string(to_string(state.kind)));
  }
  return s;
}

namespace detail {

// thinning[n * dim + k] = C(n, k) q^k (1 - q)^(n - k), built by the Pascal
// recurrence so no factorials or powers are formed.
inline std::vector<double> binomial_table(double q, int cutoff) {
  const std::size_t dim = static_cast<std::size_t>(cutoff) + 1;
  std::vector<double> b(dim * dim, 0.0);
  b[0] = 1.0;
  for (std::size_t n = 1; n < dim; ++n) {
    for (std::size_t k = 0; k <= n; ++k) {
      const double stay = k < n ? b[(n - 1) * dim + k] * (1.0 - q) : 0.0;
      const double pass = k > 0 ? b[(n - 1) * dim + k - 1] * q : 0.0;
      b[n * dim + k] = stay + pass;
    }
  }
  return b;
}

}  // namespace detail

/// Photon-number distribution after the sensor (transmittance T) and the
/// loss channels. Sensor and loss on mode a compose into one binomial
/// channel of transmissivity eta_a * T.
inline JointPhotonDistribution apply_channels(const TruncatedTwoModeState& state, double T, double eta_a,
                                              double eta_b) {
  auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
  if (!in_unit(T) || !in_unit(eta_a) || !in_unit(eta_b))
    throw std::invalid_argument("apply_channels: T, eta_a and eta_b must lie in [0, 1]");
  const int c = state.cutoff;
  const std::size_t dim = state.dim();
  const auto ba = detail::binomial_table(eta_a * T, c);
  const auto bb = detail::binomial_table(eta_b, c);

  // thin mode a, then mode b
  std::vector<double> partial(dim * dim, 0.0);
  for (std::size_t n = 0; n < dim; ++n)
    for (std::size_t m = 0; m < dim; ++m) {
      const double p = std::norm(state.amplitudes[n * dim + m]);
      if (p == 0.0) continue;
      for (std::size_t k = 0; k <= n; ++k) partial[k * dim + m] += ba[n * dim + k] * p;
    }
  JointPhotonDistribution out;
  out.cutoff = c;
  out.tail_mass = state.tail_mass;
  out.probabilities.assign(dim * dim, 0.0);
  for (std::size_t k = 0; k < dim; ++k)
    for (std::size_t m = 0; m < dim; ++m) {
      const double p = partial[k * dim + m];
      if (p == 0.0) continue;
      for (std::size_t j = 0; j <= m; ++j) out.probabilities[k * dim + j] += bb[m * dim + j] * p;
    }
  return out;
}

struct OracleMoments {
  double mean_na = 0.0;
  double mean_nb = 0.0;
  double var_na = 0.0;
  double var_nb = 0.0;
  double covariance = 0.0;
  double mean_M = 0.0;
  double delta_M = 0.0;
};

/// Moments of the intensity difference by direct summation over the
/// normalised truncated distribution.
inline OracleMoments oracle_moments(const JointPhotonDistribution& dist,
                                    double tolerance = kDefaultTailTolerance) {
  if (dist.tail_mass > tolerance)
    throw std::domain_error("oracle_moments: tail mass " + detail::sci(dist.tail_mass) + " above tolerance");
  const int c = dist.cutoff;
  double z = 0.0, ea = 0.0, eb = 0.0;
  for (int na = 0; na <= c; ++na)
    for (int nb = 0; nb <= c; ++nb) {
      const double p = dist.at(na, nb);
      z += p;
      ea += p * na;
      eb += p * nb;
    }
  ea /= z;
  eb /= z;
  OracleMoments m;
  m.mean_na = ea;
  m.mean_nb = eb;
  for (int na = 0; na <= c; ++na)
    for (int nb = 0; nb <= c; ++nb) {
      const double p = dist.at(na, nb) / z;
      const double da = na - ea;
      const double db = nb - eb;
      m.var_na += p * da * da;
      m.var_nb += p * db * db;
      m.covariance += p * da * db;
    }
  m.mean_M = ea - eb;
  m.delta_M = std::sqrt(std::max(0.0, m.var_na + m.var_nb - 2.0 * m.covariance));
  return m;
}

inline OracleMoments oracle_moments(const ProbeState& state, double T, double eta_a, double eta_b, int cutoff,
                                    double tolerance = kDefaultTailTolerance) {
  return oracle_moments(apply_channels(build_state(state, cutoff, tolerance), T, eta_a, eta_b), tolerance);
}

/// Worst relative disagreement between closed forms and the oracle for one
/// state kind.
struct KindReport {
  StateKind kind = StateKind::TMC;
  int tuples = 0;
  double max_rel_mean = 0.0;
  double max_rel_delta = 0.0;
  bool truncation_failure = false;
  std::string diagnostic;

  double max_deviation() const { return std::max(max_rel_mean, max_rel_delta); }
};

struct VerificationReport {
  double tolerance = 1e-6;
  int cutoff = 0;
  std::vector<KindReport> kinds;

  bool passed() const {
    return std::all_of(kinds.begin(), kinds.end(), [&](const KindReport& k) {
      return !k.truncation_failure && k.max_deviation() <= tolerance;
    });
  }
};

inline double relative_deviation(double value, double reference) {
  return std::abs(value - reference) / std::max(std::abs(reference), 1e-9);
}

/// Draws a small-parameter probe of `kind` (N <= 4, r <= 0.5,
/// |alpha|^2 <= 4) from uniform variates in [0, 1).
inline ProbeState small_probe(StateKind kind, double u0, double u1) {
  switch (kind) {
    case StateKind::TMC: return ProbeState::tmc(0.1 + 3.9 * u0, 0.1 + 3.9 * u1);
    case StateKind::TMF: return ProbeState::tmf(1.0 + std::floor(4.0 * u0));
    case StateKind::TMSV: return ProbeState::tmsv_from_squeezing(0.05 + 0.45 * u0);
    case StateKind::TMSD: {
      const double r = 0.05 + 0.45 * u0;
      const double g = std::cosh(r) * std::cosh(r);
      return ProbeState::tmsd_from(4.0 * u1, g);
    }
  }
  throw std::invalid_argument("small_probe: unknown kind");
}

/// Closed form vs oracle on `tuples` random (state, T, eta_a, eta_b) draws
/// per state kind.
inline VerificationReport verify_closed_forms(int cutoff, int tuples, std::uint64_t seed = 2024,
                                              double tolerance = 1e-6) {
  if (tuples < 1) throw std::invalid_argument("verify_closed_forms: tuples must be >= 1");
  if (cutoff < 1) throw std::invalid_argument("verify_closed_forms: cutoff must be >= 1");
  VerificationReport report{tolerance, cutoff, {}};
  const StateKind kinds[] = {StateKind::TMC, StateKind::TMF, StateKind::TMSV, StateKind::TMSD};
  for (std::size_t ki = 0; ki < 4; ++ki) {
    KindReport kr{kinds[ki], tuples};
    for (int i = 0; i < tuples; ++i) {
      const Substream stream{seed, ki, static_cast<std::uint64_t>(i), 0};
      const auto b0 = stream.block(0);
      const auto b1 = stream.block(1);
      const ProbeState probe = small_probe(kinds[ki], uniform_closed_open(b0[0]), uniform_closed_open(b0[1]));
      const double T = uniform_closed_open(b0[2]);
      const double eta_a = 0.05 + 0.95 * uniform_closed_open(b0[3]);
      const double eta_b = 0.05 + 0.95 * uniform_closed_open(b1[0]);
      const Losses loss{eta_a, eta_b};
      try {
        const auto m = oracle_moments(probe, T, eta_a, eta_b, cutoff);
        kr.max_rel_mean = std::max(kr.max_rel_mean, relative_deviation(m.mean_M, mean_M(probe, T, loss)));
        kr.max_rel_delta = std::max(kr.max_rel_delta, relative_deviation(m.delta_M, delta_M(probe, T, loss)));
      } catch (const std::domain_error& e) {
        kr.truncation_failure = true;
        kr.diagnostic = e.what();
      }
    }
    report.kinds.push_back(kr);
  }
  return report;
}

}  // namespace qspr::oracle
