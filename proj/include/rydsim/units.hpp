#pragma once

#include <cmath>
#include <numbers>

// Unit conventions used throughout the library:
//   - Rabi frequencies, detunings and decay rates are linear-frequency MHz.
//   - Wavelengths are nm, velocities m/s, separations um.
//   - C6 is MHz*um^6, vapor density is atoms/cm^3 on the public surface.
//   - The Liouvillian builder applies the single 2*pi (MHz -> rad/us)
//     conversion; nothing else multiplies by 2*pi implicitly.
// SI constants live here so that the susceptibility conversion happens in
// exactly one place (see antiblockade.hpp).

namespace rydsim {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// CODATA 2018
inline constexpr double k_boltzmann_si = 1.380649e-23;   // J/K
inline constexpr double hbar_si = 1.054571817e-34;       // J*s
inline constexpr double planck_h_si = 6.62607015e-34;    // J*s
inline constexpr double epsilon0_si = 8.8541878128e-12;  // F/m

/// Linear-frequency MHz to angular rad/s.
inline double mhz_to_rad_per_s(double f_mhz) { return two_pi * 1e6 * f_mhz; }

/// C6 in MHz*um^6 to angular SI (rad/s * m^6).
inline double c6_to_rad_per_s_m6(double c6_mhz_um6) {
  return mhz_to_rad_per_s(c6_mhz_um6) * 1e-36;
}

inline double per_cm3_to_per_m3(double n_cm3) { return n_cm3 * 1e6; }
inline double per_cm3_to_per_um3(double n_cm3) { return n_cm3 * 1e-12; }

/// Most probable speed sqrt(2 kB T / m) of the Maxwell-Boltzmann weight
/// exp(-v^2/v_p^2).
inline double most_probable_speed(double temperature_k, double mass_kg) {
  return std::sqrt(2.0 * k_boltzmann_si * temperature_k / mass_kg);
}

}  // namespace rydsim
