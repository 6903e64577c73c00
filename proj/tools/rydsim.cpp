// Batch front end: config loading, subcommand dispatch, reproducible CSV/JSON
// outputs with run manifests. Exit codes: 0 ok, 2 config problem, 3 numeric
// failure.

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "rydsim/rydsim.hpp"

namespace fs = std::filesystem;
using namespace rydsim;

namespace {

constexpr const char* kVersion = "0.1.0";

struct GlobalOptions {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 12345;
  long mc_samples = 20000;
  int threads = 1;
  int quadrature_nodes = 41;
  bool dry_run = false;
  bool no_extra_term = false;
  bool dump_liouvillian = false;
};

struct ScanFlags {
  double start_mhz = -2000.0;
  double stop_mhz = 500.0;
  double step_mhz = 5.0;
  ScanGrid grid() const { return {start_mhz, stop_mhz, step_mhz}; }
};

void add_scan_flags(CLI::App* cmd, ScanFlags& f) {
  cmd->add_option("--scan-start-mhz", f.start_mhz, "coupling detuning scan start");
  cmd->add_option("--scan-stop-mhz", f.stop_mhz, "coupling detuning scan stop");
  cmd->add_option("--scan-step-mhz", f.step_mhz, "coupling detuning scan step");
}

SimulationParams load_params(const GlobalOptions& g) {
  SimulationParams p =
      g.config_path.empty() ? SimulationParams{} : load_params_file(g.config_path);
  for (const auto& w : p.validate()) std::cerr << "warning: " << w << "\n";
  return p;
}

ScanOptions scan_options(const GlobalOptions& g) {
  ScanOptions o;
  o.mc.n_samples = g.mc_samples;
  o.mc.seed = g.seed;
  o.threads = g.threads;
  o.quadrature_nodes = g.quadrature_nodes;
  o.paper_extra_term = !g.no_extra_term;
  return o;
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::uint64_t file_digest(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return fnv1a64(ss.str());
}

/// Every subcommand reports its outputs here; reruns with the same inputs
/// produce the same file digests (timestamps live only in the manifest).
class ManifestWriter {
 public:
  ManifestWriter(const GlobalOptions& g, const SimulationParams& p,
                 const std::string& subcommand)
      : out_dir_(g.out_dir) {
    fs::create_directories(out_dir_);
    manifest_["subcommand"] = subcommand;
    manifest_["version"] = kVersion;
    manifest_["created_utc"] = utc_now();
    manifest_["seed"] = g.seed;
    manifest_["mc_samples"] = g.mc_samples;
    manifest_["threads"] = g.threads;
    manifest_["quadrature_nodes"] = g.quadrature_nodes;
    manifest_["paper_extra_term"] = !g.no_extra_term;
    manifest_["config"] = to_json(p);
    manifest_["outputs"] = json::array();
  }

  fs::path path(const std::string& name) const { return fs::path(out_dir_) / name; }

  void record(const fs::path& file) {
    manifest_["outputs"].push_back(
        json{{"file", file.filename().string()},
             {"fnv1a64", hex64(file_digest(file))}});
  }

  void write_json(const std::string& name, const json& payload) {
    const fs::path p = path(name);
    std::ofstream os(p, std::ios::binary);
    os << payload.dump(2) << "\n";
    os.close();
    record(p);
  }

  void write_scan(const std::string& name, const SpectrumScan& scan) {
    const fs::path p = path(name);
    write_scan_csv(p.string(), scan);
    record(p);
  }

  ~ManifestWriter() {
    std::ofstream os(path("manifest_" + manifest_["subcommand"].get<std::string>() +
                          ".json"),
                     std::ios::binary);
    os << manifest_.dump(2) << "\n";
  }

 private:
  std::string out_dir_;
  json manifest_;
};

int print_dry_run(const SimulationParams& p) {
  const DressedFrame f = build_dressed_frame(p.laser, p.atom);
  json out{{"dressed_frame",
            {{"delta_split_mhz", f.delta_split_mhz},
             {"omega_1_mhz", f.omega_1_mhz},
             {"omega_2_mhz", f.omega_2_mhz},
             {"gamma_1_mhz", f.gamma_1_mhz},
             {"gamma_2_mhz", f.gamma_2_mhz},
             {"pop_g1", f.pop_g1},
             {"pop_g2", f.pop_g2}}},
           {"derived",
            {{"v_p_mps", p.vapor.v_p()},
             {"delta_k_mhz_per_mps", p.laser.delta_k()},
             {"delta_k_prime_mhz_per_mps", delta_k_prime(p.laser)}}}};
  if (p.interaction.c6_mhz_um6 > 0 && f.omega_2_mhz > 0)
    out["derived"]["blockade_radius_um"] = blockade_radius_um(p.interaction, f);
  std::cout << out.dump(2) << "\n";
  return 0;
}

void dump_liouvillian_csv(const fs::path& path, const CMatrix& lv) {
  std::ofstream os(path, std::ios::binary);
  os << "# liouvillian, " << lv.rows() << "x" << lv.cols()
     << ", entries re+imj, rad/us\n";
  for (Eigen::Index i = 0; i < lv.rows(); ++i) {
    for (Eigen::Index j = 0; j < lv.cols(); ++j) {
      if (j) os << ',';
      os << format_double(lv(i, j).real()) << (lv(i, j).imag() < 0 ? "" : "+")
         << format_double(lv(i, j).imag()) << 'j';
    }
    os << '\n';
  }
}

// --- subcommand bodies ------------------------------------------------------

int run_single_atom_scan(const GlobalOptions& g, const ScanFlags& flags,
                         double v_start, double v_stop, double v_step) {
  const SimulationParams params = load_params(g);
  if (g.dry_run) return print_dry_run(params);
  ManifestWriter mw(g, params, "single-atom-scan");

  std::vector<double> vs;
  for (double v = v_start; v <= v_stop + 1e-12; v += v_step) vs.push_back(v);
  if (vs.empty()) vs.push_back(0.0);

  const auto xs = flags.grid().points();
  if (g.dump_liouvillian) {
    SimulationParams p0 = params;
    p0.laser.delta_c_mhz = xs.front();
    const LaserDrive d = velocity_shifted_drive(p0.laser, vs.front());
    using Channel = LindbladChannelT<Mat3>;
    const CMatrix lv = build_liouvillian(
        three_level_hamiltonian(d),
        {Channel::decay(3, 1, 0, params.atom.gamma_eg_mhz),
         Channel::decay(3, 2, 1, params.atom.gamma_re_mhz),
         Channel::decay(3, 2, 0, params.atom.gamma_rg_mhz)});
    dump_liouvillian_csv(mw.path("liouvillian.csv"), lv);
    mw.record(mw.path("liouvillian.csv"));
  }

  // rows are the (delta_c, v) grid; per-class solves are deterministic
  std::vector<std::string> rows(xs.size());
  ScanOptions opts = scan_options(g);
  detail::parallel_for_index(
      static_cast<long>(xs.size()), opts.threads, [&](long i) {
        SimulationParams local = params;
        local.laser.delta_c_mhz = xs[i];
        std::string chunk;
        for (double v : vs) {
          const auto res =
              solve_three_level(velocity_shifted_drive(local.laser, v), local.atom);
          chunk += format_double(xs[i]) + "," + format_double(v) + "," +
                   format_double(res.rydberg_pop) + "\n";
        }
        rows[i] = std::move(chunk);
      });

  const fs::path out = mw.path("single_atom_scan.csv");
  {
    json meta =
        scan_meta(ScanModel::SingleExact, flags.grid(), params, opts);
    std::ofstream os(out, std::ios::binary);
    os << "# " << meta.dump() << "\n";
    os << "delta_c_mhz,v_ms,rho_rr\n";
    for (const auto& r : rows) os << r;
  }
  mw.record(out);
  return 0;
}

int run_two_atom_scan(const GlobalOptions& g, const ScanFlags& flags,
                      bool interacting) {
  const SimulationParams params = load_params(g);
  if (g.dry_run) return print_dry_run(params);
  ManifestWriter mw(g, params, "two-atom-scan");
  const auto model =
      interacting ? ScanModel::TwoInteracting : ScanModel::TwoNonInteracting;
  const SpectrumScan scan =
      scan_spectrum(model, flags.grid(), params, scan_options(g));
  mw.write_scan("two_atom_scan.csv", scan);
  return 0;
}

int run_antiblockade_scan(const GlobalOptions& g, const ScanFlags& flags,
                          double c6_override, double density_override,
                          const std::string& integrator) {
  SimulationParams params = load_params(g);
  if (c6_override > 0) params.interaction.c6_mhz_um6 = c6_override;
  if (density_override > 0) params.vapor.density_cm3 = density_override;
  if (g.dry_run) return print_dry_run(params);
  ManifestWriter mw(g, params, "antiblockade-scan");

  Eq1Options eopts;
  eopts.quadrature_nodes = g.quadrature_nodes;
  if (integrator == "adaptive")
    eopts.integrator = VelocityIntegrator::Adaptive;
  else if (integrator == "gauss-hermite")
    eopts.integrator = VelocityIntegrator::GaussHermite;
  else if (integrator == "mc")
    eopts.integrator = VelocityIntegrator::MonteCarlo;
  else
    throw ConfigError("antiblockade-scan: unknown integrator '" + integrator + "'");
  eopts.mc.n_samples = g.mc_samples;
  eopts.mc.seed = g.seed;
  eopts.paper_extra_term = !g.no_extra_term;

  const auto xs = flags.grid().points();
  std::vector<Eq1Point> pts(xs.size());
  detail::parallel_for_index(
      static_cast<long>(xs.size()), g.threads, [&](long i) {
        pts[i] = eq1_dispersion_points({xs[i]}, params, eopts)[0];
      });

  ScanOptions opts = scan_options(g);
  opts.eq1_integrator = eopts.integrator;
  const fs::path out = mw.path("antiblockade_scan.csv");
  {
    json meta = scan_meta(ScanModel::Eq1, flags.grid(), params, opts);
    std::ofstream os(out, std::ios::binary);
    os << "# " << meta.dump() << "\n";
    os << "delta_c_mhz,re_chi,rho_rr,nb_mean,std_error\n";
    for (const auto& p : pts)
      os << format_double(p.delta_c_mhz) << ',' << format_double(p.re_chi) << ','
         << format_double(p.rho_rr) << ',' << format_double(p.nb_mean) << ','
         << format_double(p.std_error) << "\n";
  }
  mw.record(out);
  return 0;
}

int run_density_scan(const GlobalOptions& g, const ScanFlags& flags,
                     std::vector<double> densities) {
  SimulationParams params = load_params(g);
  if (g.dry_run) return print_dry_run(params);
  ManifestWriter mw(g, params, "density-scan");
  if (densities.empty()) densities = {0.5e13, 1e13, 2e13, 4e13};

  ScanOptions opts = scan_options(g);
  std::vector<std::pair<double, double>> heights;
  for (const double eta : densities) {
    SimulationParams p = params;
    p.vapor.density_cm3 = eta;
    const SpectrumScan scan = scan_spectrum(ScanModel::Eq1, flags.grid(), p, opts);
    const auto peaks = find_peaks(scan);
    double best = 0.0;
    for (const auto& pk : peaks)
      if (pk.kind == "anti-blockade") best = std::max(best, pk.height);
    if (best == 0.0) throw NoPeakFound("density-scan: no anti-blockade peak");
    heights.push_back({eta, best});
  }

  const fs::path out = mw.path("density_scan.csv");
  {
    std::ofstream os(out, std::ios::binary);
    os << "eta_cm3,peak_height\n";
    for (const auto& [eta, h] : heights)
      os << format_double(eta) << ',' << format_double(h) << "\n";
  }
  mw.record(out);

  const PowerLawFit fit = density_scaling_fit(heights);
  mw.write_json("density_fit.json",
                json{{"exponent", fit.exponent}, {"std_error", fit.std_error}});
  std::cout << "density exponent: " << fit.exponent << " +- " << fit.std_error
            << "\n";
  return 0;
}

int run_compare_models(const GlobalOptions& g, const ScanFlags& flags,
                       const std::string& model_a, const std::string& model_b,
                       double floor_frac) {
  const SimulationParams params = load_params(g);
  if (g.dry_run) return print_dry_run(params);
  ManifestWriter mw(g, params, "compare-models");
  const auto ma = scan_model_from_string(model_a);
  const auto mb = scan_model_from_string(model_b);
  if (!ma || !mb)
    throw ConfigError("compare-models: unknown model (expected single-exact, "
                      "two-noninteracting, two-interacting or eq1)");
  const ScanOptions opts = scan_options(g);
  const SpectrumScan a = scan_spectrum(*ma, flags.grid(), params, opts);
  const SpectrumScan b = scan_spectrum(*mb, flags.grid(), params, opts);
  mw.write_scan("model_a.csv", a);
  mw.write_scan("model_b.csv", b);
  const CompareReport rep = compare_scans(a, b, floor_frac);
  mw.write_json("comparison.json", to_json(rep));
  std::cout << "max relative deviation: " << rep.max_rel_dev << " at delta_c = "
            << rep.at_delta_c_mhz << " MHz over " << rep.n_compared
            << " points\n";
  return 0;
}

int run_peaks(const GlobalOptions& g, const std::string& in_csv,
              const std::string& out_json) {
  const SimulationParams params = load_params(g);
  ManifestWriter mw(g, params, "peaks");
  const SpectrumScan scan = read_scan_csv(in_csv);
  const auto peaks = find_peaks(scan);
  json arr = json::array();
  for (const auto& p : peaks) arr.push_back(to_json(p));
  mw.write_json(out_json.empty() ? "peaks.json" : out_json, arr);
  std::cout << arr.dump(2) << "\n";
  return 0;
}

int run_repro(const GlobalOptions& g, const std::string& figure) {
  SimulationParams params = load_params(g);
  params.laser.omega_p_mhz = 400.0;
  params.laser.delta_p_mhz = 1250.0;

  if (figure == "fig2") {
    params.laser.omega_c_mhz = 5.0;
    if (g.dry_run) return print_dry_run(params);
    ManifestWriter mw(g, params, "repro-fig2");
    const ScanFlags flags{-2000.0, 500.0, 5.0};
    const ScanOptions opts = scan_options(g);
    const SpectrumScan single =
        scan_spectrum(ScanModel::SingleExact, flags.grid(), params, opts);
    const SpectrumScan pair =
        scan_spectrum(ScanModel::TwoNonInteracting, flags.grid(), params, opts);
    mw.write_scan("fig2_single_exact.csv", single);
    mw.write_scan("fig2_two_noninteracting.csv", pair);
    mw.write_json("fig2_comparison.json", to_json(compare_scans(single, pair)));
    return 0;
  }

  if (figure == "fig3c") {
    params.laser.omega_c_mhz = 4.0;
    if (g.dry_run) return print_dry_run(params);
    ManifestWriter mw(g, params, "repro-fig3c");
    const ScanFlags flags{-400.0, 600.0, 5.0};
    ScanOptions opts = scan_options(g);
    const SpectrumScan eq1 =
        scan_spectrum(ScanModel::Eq1, flags.grid(), params, opts);
    mw.write_scan("fig3c_eq1.csv", eq1);

    // non-interacting dispersion on the same axis for the overlay
    const auto xs = flags.grid().points();
    std::vector<SpectrumPoint> pts(xs.size());
    detail::parallel_for_index(
        static_cast<long>(xs.size()), g.threads, [&](long i) {
          SimulationParams local = params;
          local.laser.delta_c_mhz = xs[i];
          const McEstimate est = doppler_average_2d(
              [&](double v1, double v2) {
                return chi_noninteracting_per_pair(v1, v2, local,
                                                   opts.paper_extra_term);
              },
              local.vapor, opts.mc);
          pts[i] = {xs[i], est.mean, est.std_error};
        });
    SpectrumScan nonint;
    nonint.points = pts;
    nonint.meta = scan_meta(ScanModel::TwoNonInteracting, flags.grid(), params, opts);
    nonint.meta["value_kind"] = "re_chi";
    mw.write_scan("fig3c_noninteracting_chi.csv", nonint);
    return 0;
  }

  if (figure == "fig3d") {
    params.laser.omega_c_mhz = 4.0;
    if (g.dry_run) return print_dry_run(params);
    ManifestWriter mw(g, params, "repro-fig3d");
    const ScanFlags flags{-200.0, 400.0, 5.0};
    const ScanOptions opts = scan_options(g);
    std::vector<std::pair<double, double>> heights;
    for (const double eta : {0.5e13, 0.75e13, 1e13, 1.5e13, 2e13, 3e13, 4e13}) {
      SimulationParams p = params;
      p.vapor.density_cm3 = eta;
      const SpectrumScan scan = scan_spectrum(ScanModel::Eq1, flags.grid(), p, opts);
      const auto peaks = find_peaks(scan);
      double best = 0.0;
      for (const auto& pk : peaks) best = std::max(best, pk.height);
      heights.push_back({eta, best});
    }
    {
      std::ofstream os(mw.path("fig3d_heights.csv"), std::ios::binary);
      os << "eta_cm3,peak_height\n";
      for (const auto& [eta, h] : heights)
        os << format_double(eta) << ',' << format_double(h) << "\n";
    }
    mw.record(mw.path("fig3d_heights.csv"));
    const PowerLawFit fit = density_scaling_fit(heights);
    mw.write_json("fig3d_fit.json",
                  json{{"exponent", fit.exponent}, {"std_error", fit.std_error}});
    return 0;
  }

  throw ConfigError("repro: unknown figure '" + figure +
                    "' (expected fig2, fig3c or fig3d)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rydberg anti-blockade spectra in thermal vapor"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  GlobalOptions g;
  app.add_option("--config", g.config_path, "JSON config file")
      ->envname("RYDSIM_CONFIG");
  app.add_option("--out-dir", g.out_dir, "output directory")
      ->envname("RYDSIM_OUT_DIR");
  app.add_option("--seed", g.seed, "top-level seed for all sampling")
      ->envname("RYDSIM_SEED");
  app.add_option("--mc-samples", g.mc_samples, "Monte-Carlo samples per point")
      ->envname("RYDSIM_MC_SAMPLES");
  app.add_option("--threads", g.threads, "worker threads (results identical)")
      ->envname("RYDSIM_THREADS");
  app.add_option("--quadrature-nodes", g.quadrature_nodes,
                 "Gauss-Hermite nodes for velocity integrals")
      ->envname("RYDSIM_QUADRATURE_NODES");
  app.add_flag("--dry-run", g.dry_run,
               "validate config, print the dressed frame, compute nothing");
  app.add_flag("--no-paper-extra-term", g.no_extra_term,
               "drop the extra coherence-damping Lindblad term");
  app.add_flag("--dump-liouvillian", g.dump_liouvillian,
               "dump the first Liouvillian as CSV (single-atom-scan)");

  ScanFlags single_flags, two_flags, anti_flags{-400.0, 600.0, 5.0},
      density_flags{-200.0, 400.0, 5.0}, compare_flags;
  double v_start = 0.0, v_stop = 0.0, v_step = 1.0;
  auto* single = app.add_subcommand("single-atom-scan",
                                    "exact three-level spectrum per velocity class");
  add_scan_flags(single, single_flags);
  single->add_option("--v-start", v_start, "velocity grid start [m/s]");
  single->add_option("--v-stop", v_stop, "velocity grid stop [m/s]");
  single->add_option("--v-step", v_step, "velocity grid step [m/s]");

  bool interacting = false;
  auto* two = app.add_subcommand("two-atom-scan",
                                 "Doppler-averaged dressed-pair spectrum");
  add_scan_flags(two, two_flags);
  two->add_flag("--interacting", interacting,
                "apply the shell-resonant |rr> shift");

  double c6_override = 0.0, density_override = 0.0;
  std::string anti_integrator = "adaptive";
  auto* anti = app.add_subcommand("antiblockade-scan",
                                  "shell-model dispersion spectrum");
  add_scan_flags(anti, anti_flags);
  anti->add_option("--c6", c6_override, "C6 [MHz um^6], overrides config");
  anti->add_option("--density", density_override, "vapor density [cm^-3]");
  anti->add_option("--integrator", anti_integrator,
                   "velocity integral: adaptive | gauss-hermite | mc");

  std::vector<double> densities;
  auto* dens = app.add_subcommand("density-scan",
                                  "anti-blockade peak height vs density + power-law fit");
  add_scan_flags(dens, density_flags);
  dens->add_option("--densities-cm3", densities, "density list [cm^-3]");

  std::string model_a = "single-exact", model_b = "two-noninteracting";
  double floor_frac = 0.05;
  auto* cmp = app.add_subcommand("compare-models",
                                 "max relative deviation between two model scans");
  add_scan_flags(cmp, compare_flags);
  cmp->add_option("--model-a", model_a, "reference model");
  cmp->add_option("--model-b", model_b, "comparison model");
  cmp->add_option("--signal-floor", floor_frac,
                  "compare only where the reference exceeds this fraction of peak");

  std::string peaks_in, peaks_out;
  auto* peaks = app.add_subcommand("peaks", "peak report for a scan CSV");
  peaks->add_option("--in", peaks_in, "input scan CSV")->required();
  peaks->add_option("--out", peaks_out, "output JSON name");

  std::string figure;
  auto* repro = app.add_subcommand("repro", "figure reproduction recipes");
  repro->add_option("figure", figure, "fig2 | fig3c | fig3d")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (single->parsed())
      return run_single_atom_scan(g, single_flags, v_start, v_stop, v_step);
    if (two->parsed()) return run_two_atom_scan(g, two_flags, interacting);
    if (anti->parsed())
      return run_antiblockade_scan(g, anti_flags, c6_override, density_override,
                                   anti_integrator);
    if (dens->parsed()) return run_density_scan(g, density_flags, densities);
    if (cmp->parsed())
      return run_compare_models(g, compare_flags, model_a, model_b, floor_frac);
    if (peaks->parsed()) return run_peaks(g, peaks_in, peaks_out);
    if (repro->parsed()) return run_repro(g, figure);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
