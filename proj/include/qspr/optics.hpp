#pragma once

// Three-layer Kretschmann model: prism / metal film / analyte.
//
// Angles are degrees at every public entry point and radians internally.

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <boost/math/tools/minima.hpp>

namespace qspr {

using complex = std::complex<double>;

inline double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

struct OpticalStack {
  double wavelength_nm = 0.0;
  double n_prism = 0.0;
  complex eps_metal{0.0, 0.0};
  double metal_thickness_nm = 0.0;
  double theta_in_deg = 0.0;

  void validate() const {
    if (!(wavelength_nm > 0.0)) throw std::invalid_argument("OpticalStack: wavelength_nm must be > 0");
    if (!(metal_thickness_nm > 0.0)) throw std::invalid_argument("OpticalStack: metal_thickness_nm must be > 0");
    if (!(n_prism > 1.0)) throw std::invalid_argument("OpticalStack: n_prism must be > 1");
    if (!(eps_metal.real() < 0.0)) throw std::invalid_argument("OpticalStack: Re(eps_metal) must be < 0");
    if (!(eps_metal.imag() >= 0.0)) throw std::invalid_argument("OpticalStack: Im(eps_metal) must be >= 0");
    if (!(theta_in_deg > 0.0 && theta_in_deg < 90.0))
      throw std::invalid_argument("OpticalStack: theta_in_deg must lie in (0, 90)");
  }

  OpticalStack with_angle(double theta_deg) const {
    OpticalStack s = *this;
    s.theta_in_deg = theta_deg;
    return s;
  }
};

struct AnalyteIndex {
  double n_a = 1.0;

  void validate() const {
    if (!(n_a >= 1.0)) throw std::invalid_argument("AnalyteIndex: n_a must be >= 1");
  }
  double permittivity() const { return n_a * n_a; }
};

/// Whether reflection_coefficient should insist on an evanescent analyte
/// field, i.e. operation beyond the prism/analyte critical angle.
enum class ResonanceCheck { none, require_evanescent };

namespace detail {

// Normal wavevector component sqrt(eps_i - eps_1 sin^2 theta) * k0 on the
// branch with Im >= 0 (Re >= 0 when purely real), so fields decay into
// absorbing and evanescent layers.
inline complex normal_wavevector(complex eps_i, complex eps_1, double sin2, double k0) {
  complex k = std::sqrt(eps_i - eps_1 * sin2) * k0;
  if (k.imag() < 0.0 || (k.imag() == 0.0 && k.real() < 0.0)) k = -k;
  return k;
}

inline complex interface_coefficient(complex k_u, complex eps_u, complex k_v, complex eps_v) {
  const complex qu = k_u / eps_u;
  const complex qv = k_v / eps_v;
  return (qu - qv) / (qu + qv);
}

}  // namespace detail

/// p-polarised reflection coefficient of an arbitrary three-layer stack.
/// No physical invariants are enforced here; see reflection_coefficient.
inline complex three_layer_reflection(complex eps1, complex eps2, complex eps3, double thickness_nm,
                                      double wavelength_nm, double theta_in_deg) {
  const double k0 = 2.0 * std::numbers::pi / wavelength_nm;
  const double s = std::sin(deg_to_rad(theta_in_deg));
  const double sin2 = s * s;
  const complex k1 = detail::normal_wavevector(eps1, eps1, sin2, k0);
  const complex k2 = detail::normal_wavevector(eps2, eps1, sin2, k0);
  const complex k3 = detail::normal_wavevector(eps3, eps1, sin2, k0);
  const complex r12 = detail::interface_coefficient(k1, eps1, k2, eps2);
  const complex r23 = detail::interface_coefficient(k2, eps2, k3, eps3);
  const complex phase = std::exp(complex{0.0, 2.0} * k2 * thickness_nm);
  return (phase * r23 + r12) / (phase * r23 * r12 + 1.0);
}

inline complex reflection_coefficient(const OpticalStack& stack, AnalyteIndex analyte,
                                      ResonanceCheck check = ResonanceCheck::none) {
  stack.validate();
  analyte.validate();
  if (check == ResonanceCheck::require_evanescent &&
      analyte.n_a >= stack.n_prism * std::sin(deg_to_rad(stack.theta_in_deg))) {
    throw std::domain_error("reflection_coefficient: analyte wave is propagating (n_a >= n_p sin(theta_in))");
  }
  return three_layer_reflection(complex{stack.n_prism * stack.n_prism, 0.0}, stack.eps_metal,
                                complex{analyte.permittivity(), 0.0}, stack.metal_thickness_nm,
                                stack.wavelength_nm, stack.theta_in_deg);
}

/// Sensor transmittance T = |r_spp|^2.
inline double transmittance(const OpticalStack& stack, AnalyteIndex analyte) {
  return std::norm(reflection_coefficient(stack, analyte));
}

/// Resonance angle (degrees) from the lossless surface-plasmon matching
/// condition. `n_metal_sq` is Re(eps_m), a negative number.
inline double resonance_angle(double n_a, double n_metal_sq, double n_prism) {
  if (!(n_a > 0.0) || !(n_prism > 0.0))
    throw std::invalid_argument("resonance_angle: n_a and n_prism must be positive");
  const double na2 = n_a * n_a;
  const double denom = na2 + n_metal_sq;
  if (denom == 0.0) throw std::domain_error("resonance_angle: n_a^2 + n_m^2 vanishes");
  const double q = na2 * n_metal_sq / denom;
  if (!(q > 0.0)) throw std::domain_error("resonance_angle: no surface-plasmon solution for these indices");
  const double arg = std::sqrt(q) / n_prism;
  if (!(arg > 0.0 && arg < 1.0))
    throw std::domain_error("resonance_angle: arcsin argument " + std::to_string(arg) + " outside (0, 1)");
  return rad_to_deg(std::asin(arg));
}

/// Inverse of resonance_angle: analyte index that puts the resonance at theta.
inline double index_from_angle(double theta_deg, double n_metal_sq, double n_prism) {
  const double s = std::sin(deg_to_rad(theta_deg));
  const double ps2 = n_prism * n_prism * s * s;
  const double denom = n_metal_sq - ps2;
  if (denom == 0.0) throw std::domain_error("index_from_angle: vanishing denominator n_m^2 - n_p^2 sin^2(theta)");
  const double q = ps2 * n_metal_sq / denom;
  if (!(q > 0.0)) throw std::domain_error("index_from_angle: quotient is not positive");
  return std::sqrt(q);
}

/// Angle (degrees) minimising transmittance over [lo_deg, hi_deg] with the
/// full lossy three-layer model.
inline double fresnel_minimum_angle(const OpticalStack& stack, AnalyteIndex analyte, double lo_deg,
                                    double hi_deg) {
  auto f = [&](double theta) { return transmittance(stack.with_angle(theta), analyte); };
  const auto [theta, value] = boost::math::tools::brent_find_minima(f, lo_deg, hi_deg, 48);
  (void)value;
  return theta;
}

}  // namespace qspr
