#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "rydsim/params.hpp"
#include "rydsim/two_atom.hpp"
#include "rydsim/units.hpp"

namespace rydsim {

// ---------------------------------------------------------------------------
// Deterministic counter-based sampling. Sample i is a pure function of
// (seed, i), so any evaluation order or worker split reproduces the same
// stream bit for bit.
// ---------------------------------------------------------------------------

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline double uniform01(std::uint64_t seed, std::uint64_t index,
                        std::uint64_t stream) {
  const std::uint64_t h =
      splitmix64(splitmix64(seed ^ (stream * 0xD1B54A32D192ED03ULL)) + index);
  // (h + 0.5) / 2^64, strictly inside (0, 1)
  return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace detail

/// Standard normal draw, pure function of (seed, index, stream).
inline double normal_draw(std::uint64_t seed, std::uint64_t index,
                          std::uint64_t stream = 0) {
  const double u1 = detail::uniform01(seed, index, 2 * stream);
  const double u2 = detail::uniform01(seed, index, 2 * stream + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
}

/// Pairwise (cascade) summation: deterministic and well conditioned for any
/// length, independent of how the values were produced.
inline double pairwise_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (double v : values) s += v;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

struct McConfig {
  long n_samples = 20000;
  std::uint64_t seed = 12345;
  bool antithetic = true;

  void validate() const {
    if (n_samples < 100)
      throw std::invalid_argument("mc: n_samples must be >= 100");
  }
};

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  long n_rejected = 0;
  long n_samples = 0;

  /// Exclusion bookkeeping: more than 1e-3 rejected means the guard band is
  /// eating into the distribution and results should not be trusted blindly.
  bool rejection_flagged() const {
    return n_samples > 0 && double(n_rejected) / double(n_samples) >= 1e-3;
  }
};

/// Maxwell-Boltzmann velocity for sample `index`: the weight exp(-v^2/v_p^2)
/// is a normal with sigma = v_p/sqrt(2), absorbed into the sampling so the
/// 1/(sqrt(pi) v_p) normalization cancels exactly. With antithetic pairing,
/// consecutive even/odd indices share a draw with opposite sign.
inline double sample_velocity(const McConfig& mc, const VaporParams& vapor,
                              std::uint64_t index, std::uint64_t stream) {
  const double sigma = vapor.v_p() / std::sqrt(2.0);
  if (mc.antithetic) {
    const double z = normal_draw(mc.seed, index / 2, stream);
    return (index % 2 == 0 ? sigma : -sigma) * z;
  }
  return sigma * normal_draw(mc.seed, index, stream);
}

namespace detail {

/// Shared MC driver: `eval(i)` returns the integrand at sample i or throws
/// LightShiftSingular for an excluded velocity class. With antithetic pairing
/// the standard error is computed over pair means, which are independent.
template <class Eval>
McEstimate mc_reduce(Eval&& eval, const McConfig& mc) {
  mc.validate();
  std::vector<double> kept;
  kept.reserve(static_cast<std::size_t>(mc.n_samples));
  long rejected = 0;

  const long stride = mc.antithetic ? 2 : 1;
  std::vector<double> group;
  for (long i = 0; i < mc.n_samples; i += stride) {
    group.clear();
    for (long j = i; j < std::min(i + stride, mc.n_samples); ++j) {
      try {
        group.push_back(eval(static_cast<std::uint64_t>(j)));
      } catch (const LightShiftSingular&) {
        ++rejected;
      }
    }
    if (!group.empty()) {
      double g = 0.0;
      for (double v : group) g += v;
      kept.push_back(g / double(group.size()));
    }
  }

  McEstimate est;
  est.n_samples = mc.n_samples;
  est.n_rejected = rejected;
  if (kept.empty()) return est;
  const auto n = static_cast<double>(kept.size());
  est.mean = pairwise_sum(kept) / n;
  if (kept.size() > 1) {
    std::vector<double> sq(kept.size());
    for (std::size_t k = 0; k < kept.size(); ++k) {
      const double d = kept[k] - est.mean;
      sq[k] = d * d;
    }
    est.std_error = std::sqrt(pairwise_sum(sq) / (n * (n - 1.0)));
  }
  return est;
}

}  // namespace detail

/// Monte-Carlo Doppler average <f(v)> over the 1-d Maxwell-Boltzmann weight.
template <class F>
McEstimate doppler_average_1d(F&& f, const VaporParams& vapor,
                              const McConfig& mc) {
  return detail::mc_reduce(
      [&](std::uint64_t i) { return f(sample_velocity(mc, vapor, i, 0)); }, mc);
}

/// Monte-Carlo Doppler average <f(v1, v2)> with independent velocities.
template <class F>
McEstimate doppler_average_2d(F&& f, const VaporParams& vapor,
                              const McConfig& mc) {
  return detail::mc_reduce(
      [&](std::uint64_t i) {
        return f(sample_velocity(mc, vapor, i, 0),
                 sample_velocity(mc, vapor, i, 1));
      },
      mc);
}

// ---------------------------------------------------------------------------
// Gauss-Hermite quadrature (weight e^{-x^2}), Golub-Welsch construction.
// ---------------------------------------------------------------------------

struct GaussHermiteRule {
  Eigen::VectorXd nodes;    // in units of v_p
  Eigen::VectorXd weights;  // sum to sqrt(pi)

  static GaussHermiteRule make(int n) {
    if (n < 1) throw std::invalid_argument("gauss-hermite: need n >= 1");
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k + 1 < n; ++k)
      jacobi(k, k + 1) = jacobi(k + 1, k) = std::sqrt(0.5 * (k + 1));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(jacobi);
    GaussHermiteRule rule;
    rule.nodes = es.eigenvalues();
    rule.weights.resize(n);
    for (int i = 0; i < n; ++i) {
      const double v0 = es.eigenvectors()(0, i);
      rule.weights(i) = std::sqrt(pi) * v0 * v0;
    }
    return rule;
  }
};

/// Deterministic quadrature counterpart of doppler_average_1d. Nodes beyond
/// the 5 v_p cutoff are dropped (their weights are < 1e-10 of the total);
/// singular classes are skipped and counted like in the MC path.
struct QuadratureEstimate {
  double value = 0.0;
  long n_rejected = 0;
  long n_nodes = 0;
};

namespace detail {

template <class F>
double adaptive_simpson_rec(F&& f, double a, double fa, double b, double fb,
                            double m, double fm, double whole, double tol,
                            int depth) {
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson_rec(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_rec(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

template <class F>
double adaptive_simpson(F&& f, double a, double b, double tol, int depth = 48) {
  if (!(b > a)) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fb = f(b), fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_rec(f, a, fa, b, fb, m, fm, whole,
                              std::max(tol, 1e-300), depth);
}

}  // namespace detail

/// Adaptive Maxwell-weighted velocity integral for integrands with narrow
/// resonances at known locations: callers seed `cuts` with the resonant
/// velocities and guard-band edges, subdivision does the rest. Singular
/// classes contribute zero and are counted.
template <class F>
QuadratureEstimate doppler_adaptive_1d(F&& f, const VaporParams& vapor,
                                       std::vector<double> cuts,
                                       double rel_tol = 1e-7,
                                       double span_vp = 8.0) {
  const double vp = vapor.v_p();
  const double lo = -span_vp * vp, hi = span_vp * vp;
  for (double s : {0.5, 1.0, 2.0, 4.0}) {
    cuts.push_back(-s * vp);
    cuts.push_back(+s * vp);
  }
  cuts.push_back(lo);
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [&](double a, double b) { return b - a < 1e-9 * vp; }),
             cuts.end());
  while (!cuts.empty() && cuts.front() < lo) cuts.erase(cuts.begin());
  while (!cuts.empty() && cuts.back() > hi) cuts.pop_back();
  if (cuts.empty() || cuts.front() > lo) cuts.insert(cuts.begin(), lo);
  if (cuts.back() < hi) cuts.push_back(hi);

  QuadratureEstimate out;
  auto weighted = [&](double v) -> double {
    double fv;
    try {
      fv = f(v);
    } catch (const LightShiftSingular&) {
      ++out.n_rejected;
      return 0.0;
    }
    return fv * std::exp(-(v * v) / (vp * vp)) / (std::sqrt(pi) * vp);
  };

  double coarse = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const double a = cuts[i], b = cuts[i + 1], m = 0.5 * (a + b);
    coarse += (b - a) / 6.0 * (weighted(a) + 4.0 * weighted(m) + weighted(b));
  }
  const double abs_tol =
      std::max(rel_tol * std::abs(coarse) / double(cuts.size()), 1e-300);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    total += detail::adaptive_simpson(weighted, cuts[i], cuts[i + 1], abs_tol);
  out.value = total;
  out.n_nodes = static_cast<long>(cuts.size());
  return out;
}

template <class F>
QuadratureEstimate doppler_quadrature_1d(F&& f, const VaporParams& vapor,
                                         int n_nodes = 41,
                                         double cutoff_vp = 5.0) {
  const GaussHermiteRule rule = GaussHermiteRule::make(n_nodes);
  const double vp = vapor.v_p();
  QuadratureEstimate out;
  out.n_nodes = n_nodes;
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(n_nodes));
  for (int i = 0; i < n_nodes; ++i) {
    const double x = rule.nodes(i);
    if (std::abs(x) > cutoff_vp) continue;
    try {
      terms.push_back(rule.weights(i) * f(vp * x));
    } catch (const LightShiftSingular&) {
      ++out.n_rejected;
    }
  }
  out.value = pairwise_sum(terms) / std::sqrt(pi);
  return out;
}

}  // namespace rydsim
