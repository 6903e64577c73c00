#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "rydsim/antiblockade.hpp"
#include "rydsim/config.hpp"
#include "rydsim/single_atom.hpp"
#include "rydsim/thermal.hpp"
#include "rydsim/two_atom.hpp"

namespace rydsim {

struct NoPeakFound : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Shortest-exact float formatting used for every CSV body so that rerun
/// bytes can be compared directly.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct SpectrumPoint {
  double delta_c_mhz = 0.0;
  double value = 0.0;
  double std_error = 0.0;
};

/// Ordered scan plus the full parameter echo needed to reproduce it bitwise.
struct SpectrumScan {
  std::vector<SpectrumPoint> points;
  json meta;

  void check_ordered() const {
    for (std::size_t i = 1; i < points.size(); ++i)
      if (!(points[i].delta_c_mhz > points[i - 1].delta_c_mhz))
        throw std::invalid_argument("SpectrumScan: delta_c must be strictly increasing");
  }
};

struct ScanGrid {
  double start_mhz = -2000.0;
  double stop_mhz = 500.0;
  double step_mhz = 5.0;

  std::vector<double> points() const {
    if (step_mhz <= 0) throw std::invalid_argument("scan grid: step must be > 0");
    std::vector<double> out;
    const auto n = static_cast<long>(std::floor((stop_mhz - start_mhz) / step_mhz + 1e-9));
    out.reserve(n + 1);
    for (long i = 0; i <= n; ++i) out.push_back(start_mhz + i * step_mhz);
    if (out.empty()) throw std::invalid_argument("scan grid: empty");
    return out;
  }
};

enum class ScanModel { SingleExact, TwoNonInteracting, TwoInteracting, Eq1 };

inline const char* to_string(ScanModel m) {
  switch (m) {
    case ScanModel::SingleExact: return "single-exact";
    case ScanModel::TwoNonInteracting: return "two-noninteracting";
    case ScanModel::TwoInteracting: return "two-interacting";
    case ScanModel::Eq1: return "eq1";
  }
  return "?";
}

inline std::optional<ScanModel> scan_model_from_string(const std::string& s) {
  if (s == "single-exact") return ScanModel::SingleExact;
  if (s == "two-noninteracting") return ScanModel::TwoNonInteracting;
  if (s == "two-interacting") return ScanModel::TwoInteracting;
  if (s == "eq1") return ScanModel::Eq1;
  return std::nullopt;
}

struct ScanOptions {
  McConfig mc;
  int threads = 1;
  int quadrature_nodes = 41;
  bool paper_extra_term = true;
  VelocityIntegrator eq1_integrator = VelocityIntegrator::Adaptive;
};

inline const char* to_string(VelocityIntegrator v) {
  switch (v) {
    case VelocityIntegrator::Adaptive: return "adaptive";
    case VelocityIntegrator::GaussHermite: return "gauss-hermite";
    case VelocityIntegrator::MonteCarlo: return "mc";
  }
  return "?";
}

namespace detail {

/// Index-parallel map with deterministic output placement. Worker count
/// never affects results: sample streams are counter-based and each index
/// writes only its own slot.
template <class Fn>
void parallel_for_index(long n, int threads, Fn&& fn) {
  threads = std::max(1, threads);
  if (threads == 1 || n <= 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&]() {
    for (;;) {
      const long i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace detail

inline json scan_meta(ScanModel model, const ScanGrid& grid,
                      const SimulationParams& params, const ScanOptions& opts) {
  json meta{{"model", to_string(model)},
            {"grid", {{"start_mhz", grid.start_mhz},
                      {"stop_mhz", grid.stop_mhz},
                      {"step_mhz", grid.step_mhz}}},
            {"params", to_json(params)},
            {"mc", {{"n_samples", opts.mc.n_samples},
                    {"seed", opts.mc.seed},
                    {"antithetic", opts.mc.antithetic}}},
            {"quadrature_nodes", opts.quadrature_nodes},
            {"eq1_integrator", to_string(opts.eq1_integrator)},
            {"paper_extra_term", opts.paper_extra_term},
            {"value_kind", model == ScanModel::Eq1 ? "re_chi" : "rho_rr"}};
  meta["config_hash"] = hex64(fnv1a64(meta.dump()));
  return meta;
}

/// Doppler-averaged spectrum of the requested model over the delta_c grid.
/// Points are computed independently (parallel map); the per-point sample
/// stream is fixed by (seed, index), so results do not depend on `threads`.
inline SpectrumScan scan_spectrum(ScanModel model, const ScanGrid& grid,
                                  const SimulationParams& params,
                                  const ScanOptions& opts = {}) {
  const std::vector<double> xs = grid.points();
  SpectrumScan scan;
  scan.points.resize(xs.size());
  scan.meta = scan_meta(model, grid, params, opts);

  if (model == ScanModel::Eq1) {
    Eq1Options eopts;
    eopts.quadrature_nodes = opts.quadrature_nodes;
    eopts.integrator = opts.eq1_integrator;
    eopts.mc = opts.mc;
    eopts.paper_extra_term = opts.paper_extra_term;
    detail::parallel_for_index(
        static_cast<long>(xs.size()), opts.threads, [&](long i) {
          const auto pts = eq1_dispersion_points({xs[i]}, params, eopts);
          scan.points[i] = {xs[i], pts[0].re_chi, pts[0].std_error};
        });
    return scan;
  }

  detail::parallel_for_index(
      static_cast<long>(xs.size()), opts.threads, [&](long i) {
        SimulationParams local = params;
        local.laser.delta_c_mhz = xs[i];
        McEstimate est;
        switch (model) {
          case ScanModel::SingleExact:
            est = doppler_average_1d(
                [&](double v) {
                  return solve_three_level(velocity_shifted_drive(local.laser, v),
                                           local.atom)
                      .rydberg_pop;
                },
                local.vapor, opts.mc);
            break;
          case ScanModel::TwoNonInteracting:
            est = doppler_average_2d(
                [&](double v1, double v2) {
                  return two_atom_total_pop(local.laser, local.atom, v1, v2,
                                            nullptr, opts.paper_extra_term);
                },
                local.vapor, opts.mc);
            break;
          case ScanModel::TwoInteracting:
            est = doppler_average_2d(
                [&](double v1, double v2) {
                  return two_atom_total_pop(local.laser, local.atom, v1, v2,
                                            &local.interaction,
                                            opts.paper_extra_term);
                },
                local.vapor, opts.mc);
            break;
          case ScanModel::Eq1:
            break;
        }
        scan.points[i] = {xs[i], est.mean, est.std_error};
      });
  return scan;
}

// ---------------------------------------------------------------------------
// Peak analytics
// ---------------------------------------------------------------------------

struct PeakReport {
  double position_mhz = 0.0;
  double height = 0.0;  // above the local baseline
  double fwhm_mhz = 0.0;
  std::string kind;  // "anti-blockade" or "two-photon"
};

namespace detail {

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double m = v[mid];
  if (v.size() % 2 == 0) {
    std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
    m = 0.5 * (m + v[mid - 1]);
  }
  return m;
}

inline double interp_crossing(double x0, double y0, double x1, double y1,
                              double level) {
  if (y1 == y0) return x0;
  return x0 + (level - y0) * (x1 - x0) / (y1 - y0);
}

}  // namespace detail

/// Local maxima above the noise floor (3x median std_error). Height is
/// measured against a local baseline: the median of the 10%-of-scan windows
/// flanking the peak's own valley-to-valley extent. FWHM is interpolated at
/// half height above that baseline.
inline std::vector<PeakReport> find_peaks(const SpectrumScan& scan) {
  const auto& pts = scan.points;
  const auto n = static_cast<long>(pts.size());
  if (n < 3) throw NoPeakFound("find_peaks: scan too short");

  std::vector<double> errs;
  errs.reserve(n);
  for (const auto& p : pts) errs.push_back(p.std_error);
  const double floor = 3.0 * detail::median(std::move(errs));

  auto value = [&](long i) { return pts[i].value; };

  std::vector<PeakReport> out;
  for (long i = 1; i + 1 < n; ++i) {
    if (!(value(i) > value(i - 1) && value(i) >= value(i + 1))) continue;

    // valley-to-valley extent: walk down while the signal keeps descending
    long lo = i;
    while (lo > 0 && value(lo - 1) <= value(lo)) --lo;
    long hi = i;
    while (hi + 1 < n && value(hi + 1) <= value(hi)) ++hi;

    // prominence guard against noise maxima riding on a larger peak
    double valley = std::min(value(lo), value(hi));
    const double prominence = value(i) - valley;
    if (prominence <= floor || prominence <= 0.0) continue;

    const long win = std::max<long>(2, n / 10);
    std::vector<double> flank;
    for (long k = std::max<long>(0, lo - win); k < lo; ++k) flank.push_back(value(k));
    for (long k = hi + 1; k <= std::min(n - 1, hi + win); ++k) flank.push_back(value(k));
    const double baseline = flank.empty()
                                ? std::min(value(lo), value(hi))
                                : detail::median(std::move(flank));

    const double height = value(i) - baseline;
    if (height <= floor || height <= 0.0) continue;

    const double half = baseline + 0.5 * height;
    double left = pts[lo].delta_c_mhz;
    for (long k = i; k > 0; --k)
      if (value(k - 1) <= half && value(k) > half) {
        left = detail::interp_crossing(pts[k - 1].delta_c_mhz, value(k - 1),
                                       pts[k].delta_c_mhz, value(k), half);
        break;
      }
    double right = pts[hi].delta_c_mhz;
    for (long k = i; k + 1 < n; ++k)
      if (value(k + 1) <= half && value(k) > half) {
        right = detail::interp_crossing(pts[k].delta_c_mhz, value(k),
                                        pts[k + 1].delta_c_mhz, value(k + 1), half);
        break;
      }

    PeakReport r;
    r.position_mhz = pts[i].delta_c_mhz;
    r.height = height;
    r.fwhm_mhz = right - left;
    out.push_back(r);
  }

  if (out.empty()) throw NoPeakFound("find_peaks: no peak above the noise floor");

  // dressed-state resonances sit near delta_c ~ +LS (anti-blockade) and
  // delta_c ~ -(delta_p + LS) (two-photon); split at the midpoint when the
  // scan metadata carries the laser parameters
  double split = 0.5 * (pts.front().delta_c_mhz + pts.back().delta_c_mhz);
  if (scan.meta.contains("params")) {
    const auto& laser = scan.meta.at("params").at("laser");
    const double dp = laser.at("delta_p_mhz").get<double>();
    const double op = laser.at("omega_p_mhz").get<double>();
    if (dp != 0.0) {
      const double ls = op * op / (4.0 * dp);
      split = 0.5 * (ls - (dp + ls));
    }
  }
  for (auto& r : out)
    r.kind = r.position_mhz >= split ? "anti-blockade" : "two-photon";
  std::sort(out.begin(), out.end(), [](const PeakReport& a, const PeakReport& b) {
    return a.position_mhz < b.position_mhz;
  });
  return out;
}

inline json to_json(const PeakReport& r) {
  return json{{"kind", r.kind},
              {"position_mhz", r.position_mhz},
              {"height", r.height},
              {"fwhm_mhz", r.fwhm_mhz}};
}

// ---------------------------------------------------------------------------
// Density scaling fit
// ---------------------------------------------------------------------------

struct PowerLawFit {
  double exponent = 0.0;
  double std_error = 0.0;
};

/// Least-squares slope of log(height) against log(density).
inline PowerLawFit density_scaling_fit(
    const std::vector<std::pair<double, double>>& heights) {
  if (heights.size() < 4)
    throw std::invalid_argument("density fit: need at least 4 density points");
  double eta_min = heights.front().first, eta_max = heights.front().first;
  for (const auto& [eta, h] : heights) {
    if (eta <= 0.0 || h <= 0.0)
      throw std::invalid_argument("density fit: densities and heights must be > 0");
    eta_min = std::min(eta_min, eta);
    eta_max = std::max(eta_max, eta);
  }
  if (eta_max < 4.0 * eta_min)
    throw std::invalid_argument("density fit: densities must span at least 4x");

  const auto n = static_cast<double>(heights.size());
  double sx = 0, sy = 0;
  for (const auto& [eta, h] : heights) {
    sx += std::log(eta);
    sy += std::log(h);
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (const auto& [eta, h] : heights) {
    const double dx = std::log(eta) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(h) - my);
  }
  PowerLawFit fit;
  fit.exponent = sxy / sxx;
  double ss_res = 0;
  for (const auto& [eta, h] : heights) {
    const double r = (std::log(h) - my) - fit.exponent * (std::log(eta) - mx);
    ss_res += r * r;
  }
  if (heights.size() > 2)
    fit.std_error = std::sqrt(ss_res / ((n - 2.0) * sxx));
  return fit;
}

// ---------------------------------------------------------------------------
// CSV in/out and scan comparison
// ---------------------------------------------------------------------------

inline void write_scan_csv(std::ostream& os, const SpectrumScan& scan) {
  os << "# " << scan.meta.dump() << "\n";
  os << "delta_c_mhz,value,std_error\n";
  for (const auto& p : scan.points)
    os << format_double(p.delta_c_mhz) << ',' << format_double(p.value) << ','
       << format_double(p.std_error) << "\n";
}

inline void write_scan_csv(const std::string& path, const SpectrumScan& scan) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_scan_csv(os, scan);
}

inline SpectrumScan read_scan_csv(std::istream& is) {
  SpectrumScan scan;
  std::string line;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto start = line.find('{');
      if (start != std::string::npos)
        scan.meta = json::parse(line.substr(start), nullptr, false);
      continue;
    }
    if (!header_seen) {
      header_seen = true;  // column header
      continue;
    }
    SpectrumPoint p;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &p.delta_c_mhz, &p.value,
                    &p.std_error) >= 2)
      scan.points.push_back(p);
  }
  scan.check_ordered();
  return scan;
}

inline SpectrumScan read_scan_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open: " + path);
  return read_scan_csv(is);
}

struct CompareReport {
  double max_rel_dev = 0.0;
  double at_delta_c_mhz = 0.0;
  long n_compared = 0;
  double signal_floor_frac = 0.05;
  bool peak_normalized = true;
};

/// Pointwise relative deviation between two scans on the same grid, each
/// peak-normalized, restricted to points where the reference (scan a) exceeds
/// the floor fraction of its peak.
inline CompareReport compare_scans(const SpectrumScan& a, const SpectrumScan& b,
                                   double signal_floor_frac = 0.05,
                                   bool peak_normalized = true) {
  if (a.points.size() != b.points.size())
    throw std::invalid_argument("compare: scans have different lengths");
  double amax = 0.0, bmax = 0.0;
  for (const auto& p : a.points) amax = std::max(amax, std::abs(p.value));
  for (const auto& p : b.points) bmax = std::max(bmax, std::abs(p.value));
  if (amax == 0.0 || bmax == 0.0)
    throw std::invalid_argument("compare: flat scan");
  const double na = peak_normalized ? 1.0 / amax : 1.0;
  const double nb = peak_normalized ? 1.0 / bmax : 1.0;

  CompareReport rep;
  rep.signal_floor_frac = signal_floor_frac;
  rep.peak_normalized = peak_normalized;
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    if (std::abs(a.points[i].delta_c_mhz - b.points[i].delta_c_mhz) > 1e-9)
      throw std::invalid_argument("compare: grids differ");
    const double ra = a.points[i].value * na;
    const double rb = b.points[i].value * nb;
    if (ra < signal_floor_frac) continue;
    ++rep.n_compared;
    const double dev = std::abs(ra - rb) / ra;
    if (dev > rep.max_rel_dev) {
      rep.max_rel_dev = dev;
      rep.at_delta_c_mhz = a.points[i].delta_c_mhz;
    }
  }
  return rep;
}

inline json to_json(const CompareReport& r) {
  return json{{"max_rel_dev", r.max_rel_dev},
              {"at_delta_c_mhz", r.at_delta_c_mhz},
              {"n_compared", r.n_compared},
              {"signal_floor_frac", r.signal_floor_frac},
              {"peak_normalized", r.peak_normalized}};
}

}  // namespace rydsim
