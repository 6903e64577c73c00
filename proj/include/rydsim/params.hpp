#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "rydsim/units.hpp"

namespace rydsim {

/// Probe/coupling laser pair driving the g -> e -> r ladder. Detunings and
/// Rabi frequencies are linear-frequency MHz. Wavevectors are derived from
/// the wavelengths, never stored.
struct LaserDrive {
  double omega_p_mhz = 0.0;
  double omega_c_mhz = 0.0;
  double delta_p_mhz = 0.0;
  double delta_c_mhz = 0.0;
  double lambda_p_nm = 780.0;
  double lambda_c_nm = 480.0;

  // Doppler shifts are expressed as v/lambda (linear frequency), so the
  // "wavevector" carried around is 1/lambda in MHz per (m/s).
  double k_p() const { return 1e-6 / (lambda_p_nm * 1e-9); }
  double k_c() const { return 1e-6 / (lambda_c_nm * 1e-9); }
  double delta_k() const { return k_c() - k_p(); }

  /// Throws std::invalid_argument on hard violations, returns soft warnings.
  std::vector<std::string> validate() const {
    if (omega_p_mhz < 0 || omega_c_mhz < 0)
      throw std::invalid_argument("laser: Rabi frequencies must be >= 0");
    if (!(lambda_p_nm > lambda_c_nm && lambda_c_nm > 0))
      throw std::invalid_argument(
          "laser: counter-propagating ladder requires lambda_p > lambda_c > 0");
    std::vector<std::string> warnings;
    if (delta_p_mhz != 0.0 &&
        std::abs(omega_p_mhz / delta_p_mhz) >= 1.0)
      warnings.push_back("laser: |omega_p/delta_p| >= 1, outside the "
                         "perturbative dressed-state regime");
    return warnings;
  }
};

/// Atomic decay rates and probe-transition dipole moment.
struct AtomSystem {
  double gamma_eg_mhz = 6.0;
  double gamma_re_mhz = 0.01;
  double gamma_rg_mhz = 0.1;   // transit-time decay r -> g
  double mu_eg_cm = 3.584e-29; // C*m, external literature input
  double mass_kg = 1.40999e-25;

  std::vector<std::string> validate() const {
    if (gamma_eg_mhz <= 0 || gamma_re_mhz <= 0 || gamma_rg_mhz <= 0)
      throw std::invalid_argument("atom: all decay rates must be > 0");
    if (mass_kg <= 0) throw std::invalid_argument("atom: mass must be > 0");
    std::vector<std::string> warnings;
    if (gamma_re_mhz > 0.1 * gamma_eg_mhz || gamma_rg_mhz > 0.1 * gamma_eg_mhz)
      warnings.push_back("atom: gamma_re/gamma_rg not << gamma_eg; parameters "
                         "are outside the usual Rydberg hierarchy");
    return warnings;
  }
};

/// Thermal vapor: number density and temperature. The most probable speed is
/// recomputed on access so it can never go stale.
struct VaporParams {
  double density_cm3 = 3.0e13;
  double temperature_k = 400.0;
  double mass_kg = 1.40999e-25;

  double v_p() const { return most_probable_speed(temperature_k, mass_kg); }

  std::vector<std::string> validate() const {
    if (density_cm3 <= 0) throw std::invalid_argument("vapor: density must be > 0");
    if (temperature_k <= 0) throw std::invalid_argument("vapor: temperature must be > 0");
    if (mass_kg <= 0) throw std::invalid_argument("vapor: mass must be > 0");
    return {};
  }
};

/// Van der Waals coefficient, sign convention: the pair state |rr> at
/// separation r is shifted by V_rr = C6/r^6 (repulsive => positive).
struct InteractionParams {
  double c6_mhz_um6 = 1.0e5;
  int principal_n = 35;  // metadata only

  std::vector<std::string> validate() const {
    std::vector<std::string> warnings;
    if (c6_mhz_um6 == 0.0)
      warnings.push_back("interaction: c6 = 0, interacting runs degenerate to "
                         "the non-interacting model");
    return warnings;
  }

  /// Optional helper, not derived from any measured scaling: C6 estimated
  /// from a reference (n_ref, c6_ref) via the usual (n*)^11 law.
  static double scale_c6(double c6_ref, int n_ref, int n) {
    return c6_ref * std::pow(double(n) / double(n_ref), 11.0);
  }
};

/// Derived dressed-frame quantities for one velocity class of the strongly
/// driven probe transition.
struct DressedFrame {
  double delta_split_mhz = 0.0;  // energy difference between |g2> and |g1>
  double omega_1_mhz = 0.0;      // coupling on |g1> -> |r>
  double omega_2_mhz = 0.0;      // coupling on |g2> -> |r>
  double gamma_1_mhz = 0.0;      // r -> g1 decay
  double gamma_2_mhz = 0.0;      // r -> g2 decay
  double pop_g1 = 0.0;
  double pop_g2 = 1.0;
};

/// Dressed-state reduction of the probe-dressed two-level atom, valid for
/// |omega_p| < |delta_p|. pop_g2 is pinned to exactly 1; the ~1e-3 deficit is
/// part of the model error budget.
inline DressedFrame build_dressed_frame(const LaserDrive& drive,
                                        const AtomSystem& atom) {
  const double op = drive.omega_p_mhz;
  const double dp = drive.delta_p_mhz;
  if (dp == 0.0)
    throw std::invalid_argument(
        "build_dressed_frame: delta_p = 0 makes the dressed expansion singular");
  const double eps = op / (2.0 * dp);
  DressedFrame f;
  f.delta_split_mhz = dp + op * op / (2.0 * dp);
  f.omega_1_mhz = drive.omega_c_mhz;
  f.omega_2_mhz = eps * drive.omega_c_mhz;
  f.gamma_1_mhz = atom.gamma_re_mhz + eps * atom.gamma_rg_mhz;
  f.gamma_2_mhz = atom.gamma_rg_mhz + eps * atom.gamma_re_mhz;
  f.pop_g1 = std::pow(op, 4) / (16.0 * std::pow(dp, 4));
  f.pop_g2 = 1.0;
  return f;
}

/// Detunings seen by an atom moving at velocity v along the probe axis
/// (counter-propagating coupling): delta_p -> delta_p - k_p v,
/// delta_c -> delta_c + k_c v, with k v in linear-frequency MHz.
inline LaserDrive velocity_shifted_drive(const LaserDrive& drive, double v_mps) {
  LaserDrive out = drive;
  out.delta_p_mhz = drive.delta_p_mhz - drive.k_p() * v_mps;
  out.delta_c_mhz = drive.delta_c_mhz + drive.k_c() * v_mps;
  return out;
}

/// Full parameter bundle consumed by the model layers.
struct SimulationParams {
  LaserDrive laser;
  AtomSystem atom;
  VaporParams vapor;
  InteractionParams interaction;

  std::vector<std::string> validate() const {
    std::vector<std::string> w;
    auto append = [&w](std::vector<std::string> v) {
      w.insert(w.end(), v.begin(), v.end());
    };
    append(laser.validate());
    append(atom.validate());
    append(vapor.validate());
    append(interaction.validate());
    return w;
  }
};

}  // namespace rydsim
