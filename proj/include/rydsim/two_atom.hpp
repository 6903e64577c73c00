#pragma once

#include <utility>

#include "rydsim/liouville.hpp"
#include "rydsim/params.hpp"

namespace rydsim {

struct LightShiftSingular : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Velocity class within 1 MHz of bare probe resonance; the dressed expansion
/// has no meaning there and the class is excluded from averages.
inline constexpr double light_shift_guard_mhz = 1.0;

/// One dressed two-level leg of the pair model: laser detuning, coupling and
/// Rydberg decay rate, all velocity-resolved by the caller.
struct PairLeg {
  double delta_mhz = 0.0;
  double omega_mhz = 0.0;
  double gamma_mhz = 0.0;
};

/// Dressed-pair configuration. Basis order is fixed and documented:
///   0 = |g1 g2>, 1 = |g1 r>, 2 = |r g2>, 3 = |r r>.
/// frame.delta_split enters only as an identity offset on atom 1's subspace
/// (|g1> sits delta_split below |g2>, and |r> reached from it shifts along),
/// so delta_1/delta_2 are the physical leg detunings; see two_atom_hamiltonian.
struct TwoAtomConfig {
  DressedFrame frame;
  double delta_1_mhz = 0.0;
  double delta_2_mhz = 0.0;
  double vrr_shift_mhz = 0.0;
};

using Mat2 = Eigen::Matrix<cmplx, 2, 2>;
using Mat4 = Eigen::Matrix<cmplx, 4, 4>;

/// H = H1 (x) I + I (x) H2 + vrr |rr><rr| on the 4-dim dressed-pair basis.
/// Detunings carry the rotating-frame minus sign; the repulsive interaction
/// shift raises |rr>, so two-photon resonance occurs at delta1+delta2 = vrr.
inline Mat4 two_atom_hamiltonian(const PairLeg& leg1, const PairLeg& leg2,
                                 double vrr_shift_mhz,
                                 double delta_split_mhz = 0.0) {
  Mat2 h1 = Mat2::Zero();
  // -delta_split on both atom-1 levels: |g1> as printed, |r> shifted along so
  // that delta_1 stays the g1->r laser detuning. An identity offset on one
  // atom's subspace leaves the master equation invariant.
  h1(0, 0) = -delta_split_mhz;
  h1(1, 1) = -delta_split_mhz - leg1.delta_mhz;
  h1(0, 1) = h1(1, 0) = -0.5 * leg1.omega_mhz;

  Mat2 h2 = Mat2::Zero();
  h2(1, 1) = -leg2.delta_mhz;
  h2(0, 1) = h2(1, 0) = -0.5 * leg2.omega_mhz;

  const Mat2 id = Mat2::Identity();
  Mat4 h = tensor(h1, id) + tensor(id, h2);
  h(3, 3) += vrr_shift_mhz;
  return h;
}

/// Steady state of the dressed pair. Decay channels are strictly local
/// (r -> g on each atom, lifted to the composite space); the extra
/// coherence-damping term at gamma_eg rides on each channel when
/// paper_extra_term is set.
inline DensityMatrix two_atom_steady_state(const PairLeg& leg1,
                                           const PairLeg& leg2,
                                           double vrr_shift_mhz,
                                           const AtomSystem& atom,
                                           bool paper_extra_term = true,
                                           double delta_split_mhz = 0.0) {
  const Mat4 h = two_atom_hamiltonian(leg1, leg2, vrr_shift_mhz, delta_split_mhz);
  const double extra = paper_extra_term ? atom.gamma_eg_mhz : 0.0;
  const Mat2 id = Mat2::Identity();
  Mat2 c_local = Mat2::Zero();
  c_local(0, 1) = 1.0;  // |g><r| in the local {g, r} basis

  std::vector<LindbladChannelT<Mat4>> channels(2);
  channels[0].rate_mhz = leg1.gamma_mhz;
  channels[0].extra_dephasing_rate_mhz = extra;
  channels[0].collapse = tensor(c_local, id);
  channels[1].rate_mhz = leg2.gamma_mhz;
  channels[1].extra_dephasing_rate_mhz = extra;
  channels[1].collapse = tensor(id, c_local);

  return solve_steady_state(build_liouvillian(h, channels));
}

/// Mean per-atom Rydberg fraction of a pair steady state,
/// (rho22 + rho33)/2 + rho44 in 1-based index notation.
inline double pair_rydberg_fraction(const DensityMatrix& rho) {
  return 0.5 * (rho.population(1) + rho.population(2)) + rho.population(3);
}

/// Weighted Rydberg population contribution of the |g1 g2> manifold; the
/// prefactor 2*pop_g1 counts both orderings of the degenerate |g1 g2>,
/// |g2 g1> pair.
inline double two_atom_rydberg_pop(const TwoAtomConfig& cfg,
                                   const AtomSystem& atom,
                                   bool paper_extra_term = true) {
  const PairLeg leg1{cfg.delta_1_mhz, cfg.frame.omega_1_mhz, cfg.frame.gamma_1_mhz};
  const PairLeg leg2{cfg.delta_2_mhz, cfg.frame.omega_2_mhz, cfg.frame.gamma_2_mhz};
  const DensityMatrix rho =
      two_atom_steady_state(leg1, leg2, cfg.vrr_shift_mhz, atom,
                            paper_extra_term, cfg.frame.delta_split_mhz);
  return pair_rydberg_fraction(rho) * 2.0 * cfg.frame.pop_g1;
}

namespace detail {

inline double checked_probe_detuning(const LaserDrive& drive, double v_mps) {
  const double dp = drive.delta_p_mhz - drive.k_p() * v_mps;
  if (std::abs(dp) < light_shift_guard_mhz)
    throw LightShiftSingular("velocity class resonant with the bare probe (" +
                             std::to_string(v_mps) + " m/s)");
  return dp;
}

/// The dressed reduction needs |delta_p(v)| well above omega_p; classes inside
/// the breakdown band around the probe-resonant velocity belong to the same
/// excluded-and-counted family as the bare 1 MHz guard.
inline void check_dressed_validity(const LaserDrive& drive, double v_mps) {
  const double dp = drive.delta_p_mhz - drive.k_p() * v_mps;
  const double guard = std::max(light_shift_guard_mhz, 0.5 * drive.omega_p_mhz);
  if (std::abs(dp) < guard)
    throw LightShiftSingular(
        "dressed reduction invalid for velocity class " +
        std::to_string(v_mps) + " m/s (|delta_p - k_p v| < omega_p/2)");
}

/// Far past the probe-resonant class the linear-in-(omega_p/2 delta_p) decay
/// formulas can cross zero; those classes carry Maxwell weight below e^-16,
/// so a positive floor keeps the solver well posed without visible effect.
inline constexpr double gamma_floor_mhz = 1e-6;

inline DressedFrame clamped_frame(const LaserDrive& shifted_drive,
                                  const AtomSystem& atom) {
  DressedFrame f = build_dressed_frame(shifted_drive, atom);
  f.gamma_1_mhz = std::max(f.gamma_1_mhz, gamma_floor_mhz);
  f.gamma_2_mhz = std::max(f.gamma_2_mhz, gamma_floor_mhz);
  return f;
}

}  // namespace detail

/// Laser detunings of the two dressed-pair transitions for atoms moving at
/// v1 (atom in |g1>) and v2 (atom in |g2>):
///   delta_1 = delta_c + k_c v1 - omega_p^2 / 4(delta_p - k_p v1)
///   delta_2 = delta_p + delta_c + dk v2 + omega_p^2 / 4(delta_p - k_p v2)
inline std::pair<double, double> detunings_for_velocities(
    const LaserDrive& drive, double v1_mps, double v2_mps) {
  const double ls1 =
      drive.omega_p_mhz * drive.omega_p_mhz / (4.0 * detail::checked_probe_detuning(drive, v1_mps));
  const double ls2 =
      drive.omega_p_mhz * drive.omega_p_mhz / (4.0 * detail::checked_probe_detuning(drive, v2_mps));
  const double d1 = drive.delta_c_mhz + drive.k_c() * v1_mps - ls1;
  const double d2 = drive.delta_p_mhz + drive.delta_c_mhz +
                    drive.delta_k() * v2_mps + ls2;
  return {d1, d2};
}

/// Assembles a velocity-resolved pair configuration: atom 1 carries the
/// |g1>-side quantities at v1, atom 2 the |g2>-side quantities at v2.
inline TwoAtomConfig make_two_atom_config(const LaserDrive& drive,
                                          const AtomSystem& atom, double v1_mps,
                                          double v2_mps,
                                          double vrr_shift_mhz = 0.0) {
  detail::check_dressed_validity(drive, v1_mps);
  detail::check_dressed_validity(drive, v2_mps);
  const auto [d1, d2] = detunings_for_velocities(drive, v1_mps, v2_mps);
  const DressedFrame f1 = detail::clamped_frame(velocity_shifted_drive(drive, v1_mps), atom);
  const DressedFrame f2 = detail::clamped_frame(velocity_shifted_drive(drive, v2_mps), atom);
  TwoAtomConfig cfg;
  cfg.frame = f1;
  cfg.frame.omega_2_mhz = f2.omega_2_mhz;
  cfg.frame.gamma_2_mhz = f2.gamma_2_mhz;
  cfg.delta_1_mhz = d1;
  cfg.delta_2_mhz = d2;
  cfg.vrr_shift_mhz = vrr_shift_mhz;
  return cfg;
}

/// |rr> shift that makes the pair exactly two-photon resonant for this
/// velocity pair, provided a shell at that shift exists inside the blockade
/// sphere: reachable shifts are 2 C6/r^6 >= 2 omega_2 for r <= r_b. Returns 0
/// (non-interacting) when out of reach or C6 <= 0.
inline double shell_resonant_shift(const LaserDrive& drive,
                                   const AtomSystem& atom,
                                   const InteractionParams& interaction,
                                   double v1_mps, double v2_mps) {
  if (interaction.c6_mhz_um6 <= 0.0) return 0.0;
  const auto [d1, d2] = detunings_for_velocities(drive, v1_mps, v2_mps);
  const double wanted = d1 + d2;
  const double min_shift = 2.0 * build_dressed_frame(drive, atom).omega_2_mhz;
  return wanted >= min_shift ? wanted : 0.0;
}

/// Per-pair Rydberg population of the anti-blockade manifold (|g1 g2>
/// driven), optionally with the shell-resonant |rr> shift.
inline double pair_population_g1g2(const LaserDrive& drive,
                                   const AtomSystem& atom, double v1_mps,
                                   double v2_mps, double vrr_shift_mhz = 0.0,
                                   bool paper_extra_term = true) {
  const TwoAtomConfig cfg =
      make_two_atom_config(drive, atom, v1_mps, v2_mps, vrr_shift_mhz);
  return two_atom_rydberg_pop(cfg, atom, paper_extra_term);
}

/// Per-pair Rydberg population of the two-photon manifold: both atoms driven
/// out of |g2> with omega_2 at detuning delta_2, weight pop_g2^2 = 1. The
/// main peak is always computed non-interacting.
inline double pair_population_g2g2(const LaserDrive& drive,
                                   const AtomSystem& atom, double v1_mps,
                                   double v2_mps,
                                   bool paper_extra_term = true) {
  detail::check_dressed_validity(drive, v1_mps);
  detail::check_dressed_validity(drive, v2_mps);
  const auto [d1a, d2a] = detunings_for_velocities(drive, v1_mps, v1_mps);
  const auto [d1b, d2b] = detunings_for_velocities(drive, v2_mps, v2_mps);
  (void)d1a;
  (void)d1b;
  const DressedFrame f1 = detail::clamped_frame(velocity_shifted_drive(drive, v1_mps), atom);
  const DressedFrame f2 = detail::clamped_frame(velocity_shifted_drive(drive, v2_mps), atom);
  const PairLeg leg1{d2a, f1.omega_2_mhz, f1.gamma_2_mhz};
  const PairLeg leg2{d2b, f2.omega_2_mhz, f2.gamma_2_mhz};
  const DensityMatrix rho =
      two_atom_steady_state(leg1, leg2, 0.0, atom, paper_extra_term);
  return pair_rydberg_fraction(rho);
}

/// Total per-atom Rydberg population of the non-interacting (or
/// shell-interacting) pair model at one velocity pair.
inline double two_atom_total_pop(const LaserDrive& drive, const AtomSystem& atom,
                                 double v1_mps, double v2_mps,
                                 const InteractionParams* interaction = nullptr,
                                 bool paper_extra_term = true) {
  const double vrr =
      interaction ? shell_resonant_shift(drive, atom, *interaction, v1_mps, v2_mps)
                  : 0.0;
  return pair_population_g1g2(drive, atom, v1_mps, v2_mps, vrr, paper_extra_term) +
         pair_population_g2g2(drive, atom, v1_mps, v2_mps, paper_extra_term);
}

}  // namespace rydsim
