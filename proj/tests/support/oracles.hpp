#pragma once

// Independent reference implementations used only by tests. These deliberately
// avoid the library's superoperator assembly and solver so that agreement is
// a genuine cross-check, not a tautology.

#include <Eigen/Dense>
#include <complex>
#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "rydsim/liouville.hpp"

namespace oracles {

using rydsim::cmplx;
using rydsim::CMatrix;
using rydsim::CVector;

/// Closed-form steady-state excited population of a driven, decaying
/// two-level atom (Rabi omega, detuning delta, decay gamma, same units).
inline double two_level_excited_pop(double omega, double delta, double gamma) {
  return (omega * omega / 4.0) /
         (delta * delta + omega * omega / 2.0 + gamma * gamma / 4.0);
}

/// Full two-level steady state from the optical Bloch equations with
/// H = -(delta |e><e| + omega/2 (|g><e| + |e><g|)):
///   rho_eg = (omega/2) (-delta + i gamma/2) / (delta^2 + omega^2/2 + gamma^2/4)
inline CMatrix two_level_steady_state(double omega, double delta, double gamma) {
  const double denom =
      delta * delta + omega * omega / 2.0 + gamma * gamma / 4.0;
  const double pe = (omega * omega / 4.0) / denom;
  const cmplx rho_eg = 0.5 * omega * cmplx(-delta, gamma / 2.0) / denom;
  CMatrix rho(2, 2);
  rho << 1.0 - pe, std::conj(rho_eg), rho_eg, pe;
  return rho;
}

/// Dense matrix exponential propagation of vec(rho): rho(t) = unvec(e^{Lt} vec(rho0)).
inline CMatrix propagate(const CMatrix& lv, const CMatrix& rho0, double t) {
  const Eigen::Index n = rho0.rows();
  CVector v(n * n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) v(j * n + i) = rho0(i, j);
  const CMatrix expl = (lv * t).exp();
  const CVector w = expl * v;
  CMatrix out(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) out(i, j) = w(j * n + i);
  return out;
}

/// Direct elementwise Kronecker product, index formula rather than blocks.
inline CMatrix kron_direct(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < out.rows(); ++i)
    for (Eigen::Index j = 0; j < out.cols(); ++j)
      out(i, j) = a(i / b.rows(), j / b.cols()) * b(i % b.rows(), j % b.cols());
  return out;
}

inline std::mt19937_64 test_rng(std::uint64_t seed = 0xC0FFEE) {
  return std::mt19937_64(seed);
}

inline CMatrix random_complex(std::mt19937_64& rng, int rows, int cols,
                              double scale = 1.0) {
  std::normal_distribution<double> nd;
  CMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = scale * cmplx(nd(rng), nd(rng));
  return m;
}

inline CMatrix random_hermitian(std::mt19937_64& rng, int dim, double scale = 1.0) {
  const CMatrix a = random_complex(rng, dim, dim, scale);
  return 0.5 * (a + a.adjoint()).eval();
}

}  // namespace oracles
