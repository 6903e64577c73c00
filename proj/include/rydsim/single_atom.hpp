#pragma once

#include "rydsim/liouville.hpp"
#include "rydsim/params.hpp"

namespace rydsim {

/// Steady state of the exact three-level ladder, basis |g>, |e>, |r>.
struct ThreeLevelResult {
  DensityMatrix rho;
  double rydberg_pop = 0.0;
  cmplx coherence_ge{0.0, 0.0};
};

using Mat3 = Eigen::Matrix<cmplx, 3, 3>;

/// Rotating-frame ladder Hamiltonian: detunings enter with a negative sign so
/// that a red-shifted level lies below, matching the dressed-pair model and
/// putting both models' resonances on the same delta_c axis.
inline Mat3 three_level_hamiltonian(const LaserDrive& d) {
  Mat3 h = Mat3::Zero();
  h(1, 1) = -d.delta_p_mhz;
  h(2, 2) = -(d.delta_p_mhz + d.delta_c_mhz);
  h(0, 1) = h(1, 0) = -0.5 * d.omega_p_mhz;
  h(1, 2) = h(2, 1) = -0.5 * d.omega_c_mhz;
  return h;
}

inline ThreeLevelResult solve_three_level(const LaserDrive& drive,
                                          const AtomSystem& atom) {
  using Channel = LindbladChannelT<Mat3>;
  std::vector<Channel> channels = {
      Channel::decay(3, 1, 0, atom.gamma_eg_mhz),  // e -> g
      Channel::decay(3, 2, 1, atom.gamma_re_mhz),  // r -> e
      Channel::decay(3, 2, 0, atom.gamma_rg_mhz),  // r -> g (transit)
  };
  DensityMatrix rho =
      solve_steady_state(build_liouvillian(three_level_hamiltonian(drive), channels));
  ThreeLevelResult out{rho, rho.population(2), rho(0, 1)};
  return out;
}

}  // namespace rydsim
