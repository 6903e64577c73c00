#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "rydsim/units.hpp"

namespace rydsim {

using cmplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

struct NullSpaceDeficient : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

constexpr int ct_mul(int a, int b) {
  return (a == Eigen::Dynamic || b == Eigen::Dynamic) ? Eigen::Dynamic : a * b;
}

}  // namespace detail

/// Kronecker product; fixed-size inputs produce a fixed-size result so the
/// model hot paths stay allocation free.
template <class DA, class DB>
auto tensor(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  using Scalar = typename DA::Scalar;
  constexpr int R =
      detail::ct_mul(int(DA::RowsAtCompileTime), int(DB::RowsAtCompileTime));
  constexpr int C =
      detail::ct_mul(int(DA::ColsAtCompileTime), int(DB::ColsAtCompileTime));
  Eigen::Matrix<Scalar, R, C> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.template block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) =
          a(i, j) * b;
  return out;
}

/// One decay channel i -> f with collapse operator C = |f><i|. The optional
/// extra_dephasing_rate adds -(rate/2)(C^dag C rho C C^dag + H.c.), an extra
/// damping of the i<->f coherence at half that rate.
template <class Mat>
struct LindbladChannelT {
  double rate_mhz = 0.0;
  Mat collapse;
  double extra_dephasing_rate_mhz = 0.0;

  static LindbladChannelT decay(int dim, int from, int to, double rate_mhz,
                                double extra_dephasing_rate_mhz = 0.0) {
    LindbladChannelT ch;
    ch.rate_mhz = rate_mhz;
    ch.extra_dephasing_rate_mhz = extra_dephasing_rate_mhz;
    ch.collapse = Mat::Zero(dim, dim);
    ch.collapse(to, from) = 1.0;
    return ch;
  }
};

using LindbladChannel = LindbladChannelT<CMatrix>;

namespace detail {

template <class LMat, class Mat>
void add_dissipator(LMat& lv, const Mat& c, double rate, double extra_rate) {
  const Eigen::Index n = c.rows();
  const Mat id = Mat::Identity(n, n);
  const Mat cdc = c.adjoint() * c;  // |i><i| for a pure decay channel
  const Mat ccd = c * c.adjoint();  // |f><f|
  // column-major vectorization: vec(A rho B) = (B^T (x) A) vec(rho)
  lv += rate * (tensor(c.conjugate(), c)
                - 0.5 * tensor(id, cdc)
                - 0.5 * tensor(cdc.transpose(), id));
  if (extra_rate != 0.0)
    lv -= 0.5 * extra_rate * (tensor(ccd.transpose(), cdc)
                              + tensor(cdc.transpose(), ccd));
}

}  // namespace detail

/// Builds the superoperator L with vec(rho_dot) = L vec(rho) (column-major
/// vec). H and rates are linear-frequency MHz; the single 2*pi lives here, so
/// L generates time evolution in rad/us.
template <class D>
auto build_liouvillian(
    const Eigen::MatrixBase<D>& hamiltonian_mhz,
    const std::vector<LindbladChannelT<typename D::PlainObject>>& channels) {
  using Mat = typename D::PlainObject;
  constexpr int N2 =
      detail::ct_mul(int(D::RowsAtCompileTime), int(D::RowsAtCompileTime));
  using LMat = Eigen::Matrix<cmplx, N2, N2>;

  const Mat h = hamiltonian_mhz;
  const Eigen::Index n = h.rows();
  if (h.cols() != n)
    throw std::invalid_argument("build_liouvillian: H must be square");
  const double herm_defect = (h - h.adjoint()).cwiseAbs().maxCoeff();
  if (herm_defect > 1e-10 * std::max(1.0, h.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("build_liouvillian: H is not Hermitian");

  const Mat id = Mat::Identity(n, n);
  LMat lv = cmplx(0.0, -1.0) * (tensor(id, h) - tensor(h.transpose(), id));
  for (const auto& ch : channels) {
    if (ch.rate_mhz < 0)
      throw std::invalid_argument("build_liouvillian: negative channel rate");
    if (ch.collapse.rows() != n || ch.collapse.cols() != n)
      throw std::invalid_argument("build_liouvillian: channel dimension mismatch");
    detail::add_dissipator(lv, ch.collapse, ch.rate_mhz,
                           ch.extra_dephasing_rate_mhz);
  }
  return (two_pi * lv).eval();
}

/// Hermitian, trace-one density matrix. Hermiticity and trace are enforced at
/// construction; positivity is checked on demand (min_eigenvalue) because the
/// eigensolve is the expensive part.
class DensityMatrix {
 public:
  static constexpr double hermiticity_tol = 1e-10;
  static constexpr double trace_tol = 1e-10;
  static constexpr double positivity_tol = -1e-9;

  explicit DensityMatrix(CMatrix rho) : rho_(std::move(rho)) {
    if (rho_.rows() != rho_.cols())
      throw std::invalid_argument("DensityMatrix: not square");
    const double herm = (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
    if (herm > hermiticity_tol)
      throw std::invalid_argument("DensityMatrix: Hermiticity defect " +
                                  std::to_string(herm));
    const double tr_err = std::abs(rho_.trace() - cmplx(1.0, 0.0));
    if (tr_err > trace_tol)
      throw std::invalid_argument("DensityMatrix: trace defect " +
                                  std::to_string(tr_err));
  }

  int dim() const { return static_cast<int>(rho_.rows()); }
  const CMatrix& entries() const { return rho_; }
  cmplx operator()(int i, int j) const { return rho_(i, j); }
  double population(int i) const { return rho_(i, i).real(); }

  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(rho_);
    return es.eigenvalues().minCoeff();
  }

  /// Full invariant check (Hermitian, trace, positivity).
  bool is_physical() const { return min_eigenvalue() >= positivity_tol; }

 private:
  CMatrix rho_;
};

struct SteadyStateOptions {
  bool svd_fallback = false;      // diagnostic path when the direct solve fails
  double residual_reject = 1e-6;  // NullSpaceDeficient above this
};

/// Steady state of vec(rho_dot) = L vec(rho): one row of L is replaced by the
/// trace constraint and the dense system is solved directly. The result is
/// Hermitized and exactly renormalized.
template <class LMat>
DensityMatrix solve_steady_state(const LMat& lv,
                                 const SteadyStateOptions& opts = {}) {
  using Vec = Eigen::Matrix<cmplx, LMat::RowsAtCompileTime, 1>;
  const Eigen::Index n2 = lv.rows();
  const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(double(n2))));
  if (n * n != n2 || lv.cols() != n2)
    throw std::invalid_argument("solve_steady_state: L must be dim^2 x dim^2");

  LMat m = lv;
  Vec b = Vec::Zero(n2);
  // trace row replaces the row for element (0,0)
  m.row(0).setZero();
  for (Eigen::Index i = 0; i < n; ++i) m(0, i * n + i) = 1.0;
  b(0) = 1.0;

  Eigen::PartialPivLU<LMat> lu(m);
  Vec x = lu.solve(b);

  // rank deficiency of the trace-constrained system means the null space of L
  // is more than one-dimensional (multiple steady states); the residual alone
  // cannot see that because any null vector solves exactly
  double pivot_min = 1e300, pivot_max = 0.0;
  {
    const auto& u = lu.matrixLU();
    for (Eigen::Index i = 0; i < n2; ++i) {
      const double d = std::abs(u(i, i));
      pivot_min = std::min(pivot_min, d);
      pivot_max = std::max(pivot_max, d);
    }
  }
  if (pivot_max == 0.0 || pivot_min < 1e-14 * pivot_max)
    throw NullSpaceDeficient(
        "solve_steady_state: degenerate null space, LU pivot ratio " +
        std::to_string(pivot_min / std::max(pivot_max, 1e-300)));

  const double lnorm = lv.norm();
  auto rel_residual = [&](const Vec& v) {
    return lnorm > 0 ? (lv * v).norm() / lnorm : (lv * v).norm();
  };
  double res = rel_residual(x);

  if (res > opts.residual_reject && opts.svd_fallback) {
    Eigen::JacobiSVD<CMatrix> svd(CMatrix(lv), Eigen::ComputeFullV);
    Vec null_vec = svd.matrixV().col(n2 - 1);
    cmplx tr = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) tr += null_vec(i * n + i);
    if (std::abs(tr) > 1e-12) {
      null_vec /= tr;
      if (rel_residual(null_vec) < res) {
        x = null_vec;
        res = rel_residual(x);
      }
    }
  }
  if (res > opts.residual_reject || !x.allFinite()) {
    throw NullSpaceDeficient(
        "solve_steady_state: residual " + std::to_string(res) +
        ", LU pivot ratio " +
        std::to_string(pivot_min / std::max(pivot_max, 1e-300)) +
        " (multiple steady states or broken model)");
  }

  CMatrix rho = Eigen::Map<CMatrix>(x.data(), n, n);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  rho /= rho.trace().real();
  return DensityMatrix(std::move(rho));
}

}  // namespace rydsim
