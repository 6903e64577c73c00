#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <sstream>

#include "rydsim/spectra.hpp"

using namespace rydsim;
using Catch::Approx;

namespace {

SimulationParams fig_params(double omega_c = 5.0) {
  SimulationParams p;
  p.laser.omega_p_mhz = 400.0;
  p.laser.omega_c_mhz = omega_c;
  p.laser.delta_p_mhz = 1250.0;
  return p;
}

SpectrumScan synthetic_scan(double start, double step, int n,
                            const std::function<double(double)>& f,
                            double err = 0.0) {
  SpectrumScan scan;
  for (int i = 0; i < n; ++i) {
    const double x = start + i * step;
    scan.points.push_back({x, f(x), err});
  }
  return scan;
}

}  // namespace

TEST_CASE("find_peaks: Lorentzian width is recovered") {
  const double gamma = 50.0;  // half width -> FWHM = 100
  const double step = 2.0;
  const auto scan = synthetic_scan(-500.0, step, 501, [&](double x) {
    return (gamma / pi) / (x * x + gamma * gamma);
  });
  const auto peaks = find_peaks(scan);
  REQUIRE(peaks.size() == 1);
  REQUIRE(peaks[0].position_mhz == Approx(0.0).margin(step));
  REQUIRE(peaks[0].fwhm_mhz == Approx(100.0).margin(1.5 * step));
}

TEST_CASE("find_peaks: two well-separated Gaussians") {
  const double sigma = 20.0;
  auto g = [&](double x, double c) {
    return std::exp(-(x - c) * (x - c) / (2.0 * sigma * sigma));
  };
  const auto scan = synthetic_scan(-600.0, 2.0, 601, [&](double x) {
    return g(x, -250.0) + 0.5 * g(x, 150.0);
  });
  const auto peaks = find_peaks(scan);
  REQUIRE(peaks.size() == 2);
  REQUIRE(peaks[0].position_mhz == Approx(-250.0).margin(2.0));
  REQUIRE(peaks[1].position_mhz == Approx(150.0).margin(2.0));
  REQUIRE(peaks[0].height == Approx(1.0).margin(0.02));
  REQUIRE(peaks[1].height == Approx(0.5).margin(0.02));
  // Gaussian FWHM = 2 sqrt(2 ln 2) sigma
  const double fwhm = 2.0 * std::sqrt(2.0 * std::log(2.0)) * sigma;
  REQUIRE(peaks[0].fwhm_mhz == Approx(fwhm).margin(3.0));
}

TEST_CASE("find_peaks: flat scan raises NoPeakFound") {
  const auto scan = synthetic_scan(-100.0, 1.0, 201, [](double) { return 0.7; });
  REQUIRE_THROWS_AS(find_peaks(scan), NoPeakFound);
}

TEST_CASE("find_peaks: noise below the floor does not create peaks") {
  // deterministic pseudo-noise riding on a single Gaussian, err column set
  const double sigma = 30.0;
  int k = 0;
  auto noisy = [&](double x) {
    const double noise = 0.01 * std::sin(12.9898 * ++k);
    return std::exp(-x * x / (2.0 * sigma * sigma)) + noise;
  };
  auto scan = synthetic_scan(-400.0, 2.0, 401, noisy, 0.01);
  const auto peaks = find_peaks(scan);
  REQUIRE(peaks.size() == 1);
  REQUIRE(peaks[0].position_mhz == Approx(0.0).margin(4.0));
}

TEST_CASE("find_peaks: scale invariance") {
  const double sigma = 25.0;
  auto base = synthetic_scan(-300.0, 2.0, 301, [&](double x) {
    return std::exp(-x * x / (2.0 * sigma * sigma));
  });
  auto scaled = base;
  for (auto& p : scaled.points) p.value *= 1234.5;
  const auto a = find_peaks(base);
  const auto b = find_peaks(scaled);
  REQUIRE(a.size() == b.size());
  REQUIRE(b[0].position_mhz == a[0].position_mhz);
  REQUIRE(b[0].fwhm_mhz == Approx(a[0].fwhm_mhz).margin(1e-9));
  REQUIRE(b[0].height == Approx(1234.5 * a[0].height).epsilon(1e-12));
}

TEST_CASE("density_scaling_fit: exact power laws") {
  std::vector<std::pair<double, double>> quad, lin;
  for (double eta : {0.5e13, 1e13, 2e13, 4e13}) {
    quad.push_back({eta, 3.0e-33 * eta * eta});
    lin.push_back({eta, 1.7e-15 * eta});
  }
  const PowerLawFit fq = density_scaling_fit(quad);
  REQUIRE(fq.exponent == Approx(2.0).margin(1e-6));
  REQUIRE(fq.std_error == Approx(0.0).margin(1e-6));
  const PowerLawFit fl = density_scaling_fit(lin);
  REQUIRE(fl.exponent == Approx(1.0).margin(1e-6));

  std::vector<std::pair<double, double>> bad = quad;
  bad[1].second = -1.0;
  REQUIRE_THROWS_AS(density_scaling_fit(bad), std::invalid_argument);
  REQUIRE_THROWS_AS(density_scaling_fit({{1e13, 1.0}, {2e13, 4.0}}),
                    std::invalid_argument);
  // insufficient span
  REQUIRE_THROWS_AS(density_scaling_fit(
                        {{1e13, 1.0}, {1.5e13, 2.0}, {2e13, 4.0}, {3e13, 9.0}}),
                    std::invalid_argument);
}

TEST_CASE("scan grid and ordering invariant") {
  ScanGrid grid{-10.0, 10.0, 5.0};
  const auto xs = grid.points();
  REQUIRE(xs.size() == 5);
  REQUIRE(xs.front() == Approx(-10.0));
  REQUIRE(xs.back() == Approx(10.0));

  SpectrumScan scan;
  scan.points = {{0.0, 1.0, 0.0}, {0.0, 2.0, 0.0}};
  REQUIRE_THROWS_AS(scan.check_ordered(), std::invalid_argument);
}

TEST_CASE("scan_spectrum: flat zero spectrum without coupling laser") {
  SimulationParams p = fig_params(0.0);
  ScanOptions opts;
  opts.mc.n_samples = 200;
  const auto scan =
      scan_spectrum(ScanModel::SingleExact, ScanGrid{-50.0, 50.0, 25.0}, p, opts);
  for (const auto& pt : scan.points) REQUIRE(pt.value == Approx(0.0).margin(1e-15));
}

TEST_CASE("scan_spectrum: interacting equals non-interacting when C6 = 0") {
  SimulationParams p = fig_params(5.0);
  p.interaction.c6_mhz_um6 = 0.0;
  ScanOptions opts;
  opts.mc.n_samples = 400;
  const ScanGrid grid{-1300.0, -1260.0, 10.0};
  const auto a = scan_spectrum(ScanModel::TwoNonInteracting, grid, p, opts);
  const auto b = scan_spectrum(ScanModel::TwoInteracting, grid, p, opts);
  for (std::size_t i = 0; i < a.points.size(); ++i)
    REQUIRE(std::abs(a.points[i].value - b.points[i].value) < 1e-10);
}

TEST_CASE("scan_spectrum: thread count does not change results") {
  SimulationParams p = fig_params(5.0);
  ScanOptions serial;
  serial.mc.n_samples = 300;
  serial.threads = 1;
  ScanOptions parallel = serial;
  parallel.threads = 4;
  const ScanGrid grid{-1310.0, -1250.0, 5.0};
  const auto a = scan_spectrum(ScanModel::TwoNonInteracting, grid, p, serial);
  const auto b = scan_spectrum(ScanModel::TwoNonInteracting, grid, p, parallel);
  for (std::size_t i = 0; i < a.points.size(); ++i) {
    REQUIRE(a.points[i].value == b.points[i].value);  // bitwise
    REQUIRE(a.points[i].std_error == b.points[i].std_error);
  }
}

TEST_CASE("scan meta: hash changes iff parameters change") {
  SimulationParams p = fig_params(5.0);
  ScanOptions opts;
  const ScanGrid grid{-100.0, 100.0, 50.0};
  const json m1 = scan_meta(ScanModel::SingleExact, grid, p, opts);
  const json m2 = scan_meta(ScanModel::SingleExact, grid, p, opts);
  REQUIRE(m1.at("config_hash") == m2.at("config_hash"));

  SimulationParams q = p;
  q.laser.omega_c_mhz += 1e-9;
  const json m3 = scan_meta(ScanModel::SingleExact, grid, q, opts);
  REQUIRE(m1.at("config_hash") != m3.at("config_hash"));

  ScanOptions seeded = opts;
  seeded.mc.seed += 1;
  const json m4 = scan_meta(ScanModel::SingleExact, grid, p, seeded);
  REQUIRE(m1.at("config_hash") != m4.at("config_hash"));
}

TEST_CASE("CSV round trip preserves points and meta") {
  SimulationParams p = fig_params(5.0);
  ScanOptions opts;
  opts.mc.n_samples = 150;
  const auto scan =
      scan_spectrum(ScanModel::SingleExact, ScanGrid{-20.0, 40.0, 20.0}, p, opts);
  std::stringstream ss;
  write_scan_csv(ss, scan);
  const SpectrumScan back = read_scan_csv(ss);
  REQUIRE(back.points.size() == scan.points.size());
  for (std::size_t i = 0; i < back.points.size(); ++i) {
    REQUIRE(back.points[i].delta_c_mhz == scan.points[i].delta_c_mhz);
    REQUIRE(back.points[i].value == scan.points[i].value);
    REQUIRE(back.points[i].std_error == scan.points[i].std_error);
  }
  REQUIRE(back.meta.at("config_hash") == scan.meta.at("config_hash"));
}

TEST_CASE("compare_scans: identical scans and grid mismatch") {
  const auto a = synthetic_scan(-100.0, 2.0, 101, [](double x) {
    return std::exp(-x * x / 800.0);
  });
  auto b = a;
  REQUIRE(compare_scans(a, b).max_rel_dev == 0.0);
  for (auto& pt : b.points) pt.value *= 2.0;  // peak-normalization kills scale
  REQUIRE(compare_scans(a, b).max_rel_dev == Approx(0.0).margin(1e-12));
  b.points[50].value *= 1.05;
  REQUIRE(compare_scans(a, b).max_rel_dev > 0.01);

  auto c = a;
  c.points.pop_back();
  REQUIRE_THROWS_AS(compare_scans(a, c), std::invalid_argument);
}
