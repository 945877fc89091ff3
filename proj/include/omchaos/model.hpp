#pragma once

#include <cmath>
#include <string>

#include "omchaos/constants.hpp"
#include "omchaos/errors.hpp"

namespace omchaos {

/// Laboratory inputs in SI units. This is the only place physical units
/// appear; everything downstream works with the dimensionless model.
struct PhysicalParams {
  double cavity_length = 0.0;         // L, m
  double mirror_mass = 0.0;           // m, kg
  double mirror_freq = 0.0;           // omega_m, rad/s
  double pump_wavelength = 0.0;       // lambda_p, m
  double cavity_decay = 0.0;          // kappa, rad/s
  double cavity_pump_detuning = 0.0;  // Delta_c, rad/s
  double atom_number = 0.0;           // N
  double vacuum_rabi = 0.0;           // U_0, rad/s
  double atom_mass = constants::rb87_mass;  // m_a, kg
  double mirror_damping = 0.0;        // gamma_m, rad/s
  double sidemode_damping = 0.0;      // gamma_sm, rad/s
  double pump_rate = 0.0;             // eta, rad/s
};

/// Model constants scaled by the end-mirror frequency omega_m. The numerics
/// consume nothing else; time is always tau = omega_m * t.
struct DimensionlessModel {
  double kappa = 0.0;     // cavity decay / omega_m
  double detuning = 0.0;  // (Delta_c - N U_0 / 2) / omega_m
  double xi = 0.0;        // end-mirror coupling / omega_m
  double xi_sm = 0.0;     // side-mode coupling / omega_m
  double recoil = 0.0;    // omega_r / omega_m
  double pump = 0.0;      // eta / omega_m
  double gamma_m = 0.0;   // end-mirror damping / omega_m
  double gamma_sm = 0.0;  // side-mode damping / omega_m

  /// The side-mode oscillates at 4 omega_r; this product is what enters
  /// every equation of motion.
  double four_wr() const { return 4.0 * recoil; }

  double pump_sq() const { return pump * pump; }

  /// Normalized pump intensity eta^2 / kappa^2.
  double pump_ratio() const { return pump_sq() / (kappa * kappa); }

  /// Broadening of the side-mode response by its position+momentum damping.
  double sidemode_response_factor() const {
    const double w = four_wr();
    return 1.0 + (gamma_sm / w) * (gamma_sm / w);
  }

  /// Effective Kerr-like coefficient of the steady-state intensity equation:
  /// the detuning shift per intracavity photon caused by both mirrors.
  double kerr_coefficient() const {
    return xi * xi + xi_sm * xi_sm / (four_wr() * sidemode_response_factor());
  }

  bool conservative() const { return gamma_m == 0.0 && gamma_sm == 0.0; }
};

namespace detail {

inline void require_positive(double value, const char* field) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ConfigError(std::string("parameter '") + field +
                      "' must be strictly positive and finite");
  }
}

inline void require_non_negative(double value, const char* field) {
  if (value < 0.0 || !std::isfinite(value)) {
    throw ConfigError(std::string("parameter '") + field +
                      "' must be non-negative and finite");
  }
}

}  // namespace detail

/// Scales the laboratory parameters into the dimensionless model.
///
/// The pump and cavity frequencies are treated as equal when computing the
/// couplings (omega_c = 2 pi c / lambda_p): MHz-scale detunings are
/// negligible against the 10^15 rad/s optical frequency.
inline DimensionlessModel derive_model(const PhysicalParams& p) {
  detail::require_positive(p.cavity_length, "cavity_length");
  detail::require_positive(p.mirror_mass, "mirror_mass");
  detail::require_positive(p.mirror_freq, "mirror_freq");
  detail::require_positive(p.pump_wavelength, "pump_wavelength");
  detail::require_positive(p.cavity_decay, "cavity_decay");
  detail::require_positive(p.atom_mass, "atom_mass");
  detail::require_non_negative(p.atom_number, "atom_number");
  detail::require_non_negative(p.vacuum_rabi, "vacuum_rabi");
  detail::require_non_negative(p.mirror_damping, "mirror_damping");
  detail::require_non_negative(p.sidemode_damping, "sidemode_damping");
  detail::require_non_negative(p.pump_rate, "pump_rate");
  if (!std::isfinite(p.cavity_pump_detuning)) {
    throw ConfigError("parameter 'cavity_pump_detuning' must be finite");
  }

  const double omega_m = p.mirror_freq;
  const double omega_c =
      2.0 * constants::pi * constants::speed_of_light / p.pump_wavelength;
  const double wavenumber = 2.0 * constants::pi / p.pump_wavelength;
  const double omega_r =
      constants::hbar * wavenumber * wavenumber / (2.0 * p.atom_mass);

  DimensionlessModel m;
  m.kappa = p.cavity_decay / omega_m;
  m.detuning =
      (p.cavity_pump_detuning - p.atom_number * p.vacuum_rabi / 2.0) / omega_m;
  m.xi = (omega_c / p.cavity_length) *
         std::sqrt(constants::hbar / (p.mirror_mass * omega_m)) / omega_m;
  m.xi_sm = std::sqrt(p.atom_number) * p.vacuum_rabi / 2.0 / omega_m;
  m.recoil = omega_r / omega_m;
  m.pump = p.pump_rate / omega_m;
  m.gamma_m = p.mirror_damping / omega_m;
  m.gamma_sm = p.sidemode_damping / omega_m;

  // Cross-check the side-mode coupling against its effective-mass form
  // xi_sm = (omega_c/L) sqrt(hbar / (m_sm 4 omega_r)) with
  // m_sm = hbar omega_c^2 / (L^2 N U_0^2 omega_r). The two expressions are
  // algebraically identical; disagreement means a formula regression.
  if (p.atom_number > 0.0 && p.vacuum_rabi > 0.0) {
    const double m_sm =
        constants::hbar * omega_c * omega_c /
        (p.cavity_length * p.cavity_length * p.atom_number * p.vacuum_rabi *
         p.vacuum_rabi * omega_r);
    const double xi_sm_alt = (omega_c / p.cavity_length) *
                             std::sqrt(constants::hbar / (m_sm * 4.0 * omega_r)) /
                             omega_m;
    if (std::abs(xi_sm_alt - m.xi_sm) > 1e-10 * m.xi_sm) {
      throw NumericalError("side-mode coupling cross-check failed");
    }
  }
  return m;
}

/// Overrides the pump so that eta^2 / kappa^2 == ratio.
inline DimensionlessModel with_pump_ratio(DimensionlessModel m, double ratio) {
  if (ratio < 0.0 || !std::isfinite(ratio)) {
    throw ConfigError("pump ratio must be non-negative and finite");
  }
  m.pump = m.kappa * std::sqrt(ratio);
  return m;
}

inline DimensionlessModel with_damping(DimensionlessModel m, double gamma_m,
                                       double gamma_sm) {
  detail::require_non_negative(gamma_m, "mirror_damping");
  detail::require_non_negative(gamma_sm, "sidemode_damping");
  m.gamma_m = gamma_m;
  m.gamma_sm = gamma_sm;
  return m;
}

/// The documented example system: a 10^-4 m cavity with a 1 ng end-mirror at
/// 2 pi x 19 kHz, pumped at 780 nm, holding 1.2e4 Rb-87 atoms. Default pump
/// sits at eta^2/kappa^2 = 1.8, inside the bistable window.
inline PhysicalParams reference_params() {
  constexpr double two_pi = 2.0 * constants::pi;
  PhysicalParams p;
  p.cavity_length = 1e-4;
  p.mirror_mass = 1e-12;
  p.mirror_freq = two_pi * 19e3;
  p.pump_wavelength = 780e-9;
  p.cavity_decay = two_pi * 1.3e6;
  p.cavity_pump_detuning = two_pi * 15e6;
  p.atom_number = 1.2e4;
  p.vacuum_rabi = two_pi * 3.1e3;
  p.atom_mass = constants::rb87_mass;
  p.mirror_damping = 0.0;
  p.sidemode_damping = 0.0;
  p.pump_rate = p.cavity_decay * std::sqrt(1.8);
  return p;
}

}  // namespace omchaos
