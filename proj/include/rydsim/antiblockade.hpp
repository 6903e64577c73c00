#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "rydsim/params.hpp"
#include "rydsim/thermal.hpp"
#include "rydsim/two_atom.hpp"
#include "rydsim/units.hpp"

namespace rydsim {

using ShellModelInputs = SimulationParams;

/// dk' = dk + omega_p^2 k_p / (4 delta_p^2), the two-photon Doppler slope
/// including the velocity derivative of the light shift [MHz per m/s].
inline double delta_k_prime(const LaserDrive& d) {
  return d.delta_k() +
         d.omega_p_mhz * d.omega_p_mhz * d.k_p() / (4.0 * d.delta_p_mhz * d.delta_p_mhz);
}

/// delta_1'(v1) = delta_p + 2 delta_c + k_c v1 - omega_p^2 k_p v1 / (4 delta_p^2):
/// the v2-independent part of the pair resonance defect, linearized in k v.
inline double delta1_prime_mhz(double v1_mps, const LaserDrive& d) {
  return d.delta_p_mhz + 2.0 * d.delta_c_mhz + d.k_c() * v1_mps -
         d.omega_p_mhz * d.omega_p_mhz * d.k_p() * v1_mps /
             (4.0 * d.delta_p_mhz * d.delta_p_mhz);
}

/// Blockade radius r_b = (C6 / omega_2)^(1/6) in um; h cancels with C6 in
/// MHz um^6 and omega_2 in MHz.
inline double blockade_radius_um(const InteractionParams& interaction,
                                 const DressedFrame& frame) {
  if (interaction.c6_mhz_um6 <= 0.0)
    throw std::invalid_argument("blockade_radius: C6 must be > 0");
  if (frame.omega_2_mhz <= 0.0)
    throw std::invalid_argument("blockade_radius: omega_2 must be > 0");
  return std::pow(interaction.c6_mhz_um6 / frame.omega_2_mhz, 1.0 / 6.0);
}

/// Velocity of the second atom that puts the pair state into resonance at
/// shell radius r: v2 = (2 C6/r^6 - delta_1'(v1)) / dk'.
inline double resonant_velocity_mps(double r_um, double v1_mps,
                                    const ShellModelInputs& in) {
  if (r_um <= 0.0)
    throw std::invalid_argument("resonant_velocity: r must be > 0");
  const double shift = 2.0 * in.interaction.c6_mhz_um6 / std::pow(r_um, 6);
  return (shift - delta1_prime_mhz(v1_mps, in.laser)) / delta_k_prime(in.laser);
}

struct NbValue {
  double atoms = 0.0;
  bool negative_branch = false;  // delta_1' <= 0: red side, returned as 0
};

/// Closed-form shell count N_b(v1) = pi eta omega_2 sqrt(8 C6) dk' /
/// (dk delta_1'^(3/2)), eta in um^-3.
inline NbValue nb_analytic(double v1_mps, const ShellModelInputs& in) {
  const double d1p = delta1_prime_mhz(v1_mps, in.laser);
  if (d1p <= 0.0) return {0.0, true};
  const DressedFrame frame = build_dressed_frame(in.laser, in.atom);
  const double eta_um3 = per_cm3_to_per_um3(in.vapor.density_cm3);
  const double value = pi * eta_um3 * frame.omega_2_mhz *
                       std::sqrt(8.0 * in.interaction.c6_mhz_um6) *
                       delta_k_prime(in.laser) /
                       (in.laser.delta_k() * std::pow(d1p, 1.5));
  return {value, false};
}

/// Shell count from the defining integral
///   N_b(v1) = (4 pi eta / (sqrt(pi) v_p)) (omega_2/dk) int_0^rb r^2
///             exp(-v2(r)^2/v_p^2) dr
/// evaluated after the exact change of variables x = ln(dk' v2 + delta_1'),
/// which resolves the narrow resonant shell that defeats quadrature in r.
inline NbValue nb_numeric(double v1_mps, const ShellModelInputs& in,
                          double rel_tol = 1e-6) {
  const double d1p = delta1_prime_mhz(v1_mps, in.laser);
  if (d1p <= 0.0) return {0.0, true};
  const DressedFrame frame = build_dressed_frame(in.laser, in.atom);
  const double omega2 = frame.omega_2_mhz;
  const double c6 = in.interaction.c6_mhz_um6;
  if (omega2 <= 0.0 || c6 <= 0.0) return {0.0, false};

  const double dkp = delta_k_prime(in.laser);
  const double vp = in.vapor.v_p();
  // r in (0, rb] maps to s = 2 C6/r^6 >= 2 omega_2; in x = ln(dk' t + d1p)
  // with t the resonant velocity of the shell:
  //   integral_0^rb r^2 e^{-v2^2/vp^2} dr
  //     = (sqrt(8 C6)/12) int (dk' t + d1p)^{-3/2} e^{-t^2/vp^2} dk' dt
  //     = (sqrt(8 C6)/12) int e^{-x/2} e^{-t(x)^2/vp^2} dx
  const double x_lo = std::log(2.0 * omega2);
  const double t_hi = 8.0 * vp;
  const double x_hi = std::log(dkp * t_hi + d1p);
  if (!(x_hi > x_lo)) return {0.0, false};

  auto integrand = [&](double x) {
    const double s = std::exp(x);
    const double t = (s - d1p) / dkp;
    return std::exp(-0.5 * x) * std::exp(-(t * t) / (vp * vp));
  };

  // the Gaussian occupies a narrow x-window around ln(d1p); seed the
  // subdivision there or the adaptive pass can step right over it
  std::vector<double> cuts = {x_lo, x_hi};
  for (double tv : {-4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0}) {
    const double s = dkp * tv * vp + d1p;
    if (s > 0.0) {
      const double x = std::log(s);
      if (x > x_lo && x < x_hi) cuts.push_back(x);
    }
  }
  std::sort(cuts.begin(), cuts.end());

  double coarse = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1], m = 0.5 * (a + b);
    coarse += (b - a) / 6.0 *
              (integrand(a) + 4.0 * integrand(m) + integrand(b));
  }
  const double abs_tol =
      std::max(rel_tol * coarse / double(cuts.size()), 1e-300);
  double raw = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    raw += detail::adaptive_simpson(integrand, cuts[i], cuts[i + 1], abs_tol);
  const double shell_integral = std::sqrt(8.0 * c6) / 12.0 * raw;

  const double eta_um3 = per_cm3_to_per_um3(in.vapor.density_cm3);
  const double value = 4.0 * pi * eta_um3 / (std::sqrt(pi) * vp) *
                       (omega2 / in.laser.delta_k()) * shell_integral;
  return {value, false};
}

/// Hard upper bound on the shell count: the Gaussian factor replaced by 1
/// over the whole sphere. Used to regularize the closed form, whose
/// delta_1'^(-3/2) growth is not integrable near the zero crossing.
inline double nb_sphere_cap(const ShellModelInputs& in) {
  const DressedFrame frame = build_dressed_frame(in.laser, in.atom);
  const double rb = blockade_radius_um(in.interaction, frame);
  const double eta_um3 = per_cm3_to_per_um3(in.vapor.density_cm3);
  return 4.0 * pi * eta_um3 / (std::sqrt(pi) * in.vapor.v_p()) *
         (frame.omega_2_mhz / in.laser.delta_k()) * rb * rb * rb / 3.0;
}

/// Shell count entering the susceptibility integrand: closed form, capped by
/// the sphere capacity.
inline double nb_for_dispersion(double v1_mps, const ShellModelInputs& in) {
  const NbValue nb = nb_analytic(v1_mps, in);
  if (nb.negative_branch || nb.atoms <= 0.0) return 0.0;
  return std::min(nb.atoms, nb_sphere_cap(in));
}

/// Rydberg population of the shell-resonant pair at velocity v1: atom 1 at
/// its exact detuning, atom 2 taken from the v2 = 0 class with |rr> shifted
/// to exact two-photon resonance (the shell construction selects that class).
inline double shell_resonant_population(double v1_mps,
                                        const ShellModelInputs& in,
                                        bool paper_extra_term = true) {
  const auto [d1, d2] = detunings_for_velocities(in.laser, v1_mps, 0.0);
  return pair_population_g1g2(in.laser, in.atom, v1_mps, 0.0, d1 + d2,
                              paper_extra_term);
}

/// Per-velocity dispersion of the probe,
///   Re chi(v1) = eta |mu|^2 N_b(v1) rho_rr(v1) / (eps0 hbar (delta_p - k_p v1)).
/// The detuning is converted to rad/s here; N_b is dimensionless. Throws
/// LightShiftSingular inside the probe guard band.
inline double chi_per_velocity(double v1_mps, const ShellModelInputs& in,
                               bool paper_extra_term = true) {
  const double dp_mhz = detail::checked_probe_detuning(in.laser, v1_mps);
  const double nb = nb_for_dispersion(v1_mps, in);
  if (nb == 0.0) return 0.0;
  const double rho = shell_resonant_population(v1_mps, in, paper_extra_term);
  const double eta_m3 = per_cm3_to_per_m3(in.vapor.density_cm3);
  const double mu = in.atom.mu_eg_cm;
  return eta_m3 * mu * mu * nb * rho /
         (epsilon0_si * hbar_si * mhz_to_rad_per_s(dp_mhz));
}

struct Eq1Point {
  double delta_c_mhz = 0.0;
  double re_chi = 0.0;
  double rho_rr = 0.0;   // Maxwell-averaged shell-resonant pair population
  double nb_mean = 0.0;  // Maxwell-averaged (capped) shell count
  double std_error = 0.0;
  long n_rejected = 0;
};

/// The velocity integrand carries a resonance of a few MHz width (a few m/s);
/// fixed Gauss-Hermite nodes cannot resolve it, so the breakpoint-seeded
/// adaptive rule is the default. Gauss-Hermite is kept for smooth-integrand
/// cross-checks, Monte-Carlo for validating either.
enum class VelocityIntegrator { Adaptive, GaussHermite, MonteCarlo };

struct Eq1Options {
  VelocityIntegrator integrator = VelocityIntegrator::Adaptive;
  int quadrature_nodes = 41;  // Gauss-Hermite path
  double adaptive_rel_tol = 1e-7;
  McConfig mc;
  bool paper_extra_term = true;
};

/// Velocities where the Eq.-1 integrand has structure: the atom-1 resonance
/// delta_1(v) = 0, the zero crossing of delta_1'(v), and the dressed-frame
/// guard band around the probe-resonant class.
inline std::vector<double> eq1_velocity_breakpoints(const ShellModelInputs& in) {
  const LaserDrive& d = in.laser;
  std::vector<double> cuts;

  const double vp = in.vapor.v_p();
  auto add_neighborhood = [&](double v) {
    for (double w : {0.0, 0.5, 2.0, 8.0, 32.0, 128.0}) {
      cuts.push_back(v - w);
      if (w > 0.0) cuts.push_back(v + w);
    }
  };

  // delta_1(v) = 0: bracket sign changes on a coarse grid, then bisect
  auto delta1 = [&](double v) {
    const double dp = d.delta_p_mhz - d.k_p() * v;
    if (dp == 0.0) return 1e300;
    return d.delta_c_mhz + d.k_c() * v -
           d.omega_p_mhz * d.omega_p_mhz / (4.0 * dp);
  };
  const int coarse_n = 200;
  double prev_v = -8.0 * vp, prev_f = delta1(prev_v);
  for (int i = 1; i <= coarse_n; ++i) {
    const double v = -8.0 * vp + 16.0 * vp * i / coarse_n;
    const double f = delta1(v);
    if (std::isfinite(prev_f) && std::isfinite(f) && prev_f * f < 0.0 &&
        std::abs(prev_f) < 1e12 && std::abs(f) < 1e12) {
      double a = prev_v, b = v;
      for (int k = 0; k < 60; ++k) {
        const double m = 0.5 * (a + b);
        (delta1(a) * delta1(m) <= 0.0 ? b : a) = m;
      }
      add_neighborhood(0.5 * (a + b));
    }
    prev_v = v;
    prev_f = f;
  }

  // delta_1'(v) = 0 (linear): edge of the shell-count branch
  const double slope = d.k_c() - d.omega_p_mhz * d.omega_p_mhz * d.k_p() /
                                     (4.0 * d.delta_p_mhz * d.delta_p_mhz);
  if (slope != 0.0)
    add_neighborhood(-(d.delta_p_mhz + 2.0 * d.delta_c_mhz) / slope);

  // excluded band around the probe-resonant class
  if (d.k_p() != 0.0) {
    const double v_probe = d.delta_p_mhz / d.k_p();
    const double guard_v =
        std::max(light_shift_guard_mhz, 0.5 * d.omega_p_mhz) / d.k_p();
    cuts.push_back(v_probe - guard_v);
    cuts.push_back(v_probe + guard_v);
    add_neighborhood(v_probe);
  }
  return cuts;
}

/// Doppler-averaged dispersion spectrum: for each delta_c, the Maxwell
/// average of chi_per_velocity. Equals the closed-form prefactor times the
/// velocity integral by construction, and is exactly quadratic in density
/// (eta from chi, eta from N_b).
inline std::vector<Eq1Point> eq1_dispersion_points(
    const std::vector<double>& delta_c_grid_mhz, ShellModelInputs in,
    const Eq1Options& opts = {}) {
  std::vector<Eq1Point> out;
  out.reserve(delta_c_grid_mhz.size());
  for (const double dc : delta_c_grid_mhz) {
    in.laser.delta_c_mhz = dc;
    Eq1Point p;
    p.delta_c_mhz = dc;
    auto chi = [&](double v) { return chi_per_velocity(v, in, opts.paper_extra_term); };
    auto pop = [&](double v) { return shell_resonant_population(v, in, opts.paper_extra_term); };
    auto nb = [&](double v) { return nb_for_dispersion(v, in); };
    switch (opts.integrator) {
      case VelocityIntegrator::MonteCarlo: {
        const McEstimate e = doppler_average_1d(chi, in.vapor, opts.mc);
        p.re_chi = e.mean;
        p.std_error = e.std_error;
        p.n_rejected = e.n_rejected;
        p.rho_rr = doppler_average_1d(pop, in.vapor, opts.mc).mean;
        p.nb_mean = doppler_average_1d(nb, in.vapor, opts.mc).mean;
        break;
      }
      case VelocityIntegrator::GaussHermite: {
        const QuadratureEstimate e =
            doppler_quadrature_1d(chi, in.vapor, opts.quadrature_nodes);
        p.re_chi = e.value;
        p.n_rejected = e.n_rejected;
        p.rho_rr = doppler_quadrature_1d(pop, in.vapor, opts.quadrature_nodes).value;
        p.nb_mean = doppler_quadrature_1d(nb, in.vapor, opts.quadrature_nodes).value;
        break;
      }
      case VelocityIntegrator::Adaptive: {
        const std::vector<double> cuts = eq1_velocity_breakpoints(in);
        const QuadratureEstimate e =
            doppler_adaptive_1d(chi, in.vapor, cuts, opts.adaptive_rel_tol);
        p.re_chi = e.value;
        p.n_rejected = e.n_rejected;
        p.rho_rr = doppler_adaptive_1d(pop, in.vapor, cuts, opts.adaptive_rel_tol).value;
        p.nb_mean = doppler_adaptive_1d(nb, in.vapor, cuts, opts.adaptive_rel_tol).value;
        break;
      }
    }
    out.push_back(p);
  }
  return out;
}

/// Non-interacting dispersion counterpart (no shell factor): eta |mu|^2
/// <rho_rr(v1,v2)/(delta_p - k_p v1)> with the plain pair population. Linear
/// in density; used for the interacting/non-interacting comparison figures.
inline double chi_noninteracting_per_pair(double v1_mps, double v2_mps,
                                          const ShellModelInputs& in,
                                          bool paper_extra_term = true) {
  const double dp_mhz = detail::checked_probe_detuning(in.laser, v1_mps);
  const double rho =
      two_atom_total_pop(in.laser, in.atom, v1_mps, v2_mps, nullptr, paper_extra_term);
  const double eta_m3 = per_cm3_to_per_m3(in.vapor.density_cm3);
  const double mu = in.atom.mu_eg_cm;
  return eta_m3 * mu * mu * rho /
         (epsilon0_si * hbar_si * mhz_to_rad_per_s(dp_mhz));
}

}  // namespace rydsim
