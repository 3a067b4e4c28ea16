// multiport-lab: compile unitaries to mesh settings, scan correlation maps,
// estimate unitary-space coverage and simulate the phase stabilization loop.
// JSON config in, CSV/JSON artifacts out; every run is reproducible from its
// effective config.

#include "multiport/coverage.hpp"
#include "multiport/experiment.hpp"
#include "multiport/io.hpp"
#include "multiport/linalg.hpp"
#include "multiport/mesh.hpp"
#include "multiport/source.hpp"
#include "multiport/stabilize.hpp"

#include "CLI11.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

namespace fs = std::filesystem;
using multiport::Json;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr double kDegToRad = std::numbers::pi / 180.0;

struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::invalid_argument("cannot open config file: " + path);
  }
  Json j;
  try {
    in >> j;
  } catch (const Json::parse_error& e) {
    throw std::invalid_argument("malformed JSON in " + path + ": " + e.what());
  }
  return j;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::invalid_argument("cannot write output file: " + path.string());
  }
  out << text;
}

void write_json_file(const fs::path& path, const Json& j) {
  write_text(path, j.dump(2) + "\n");
}

fs::path ensure_out_dir(const std::string& out) {
  fs::path dir = out.empty() ? fs::path(".") : fs::path(out);
  fs::create_directories(dir);
  return dir;
}

multiport::Unitary preset_unitary(const std::string& preset, int n) {
  if (n < 1) {
    throw std::invalid_argument("preset requires a positive dimension (-n)");
  }
  if (preset == "bellport") return multiport::dft_matrix(n);
  if (preset == "identity") return multiport::Unitary::identity(n);
  throw std::invalid_argument("unknown preset \"" + preset + "\" (use bellport or identity)");
}

// CLI-side source schema; angles in degrees, converted exactly once.
multiport::SourceConfig source_from_cli_json(const Json& j) {
  multiport::require_known_keys(j,
                                {"n", "amplitudes", "phases_a_deg", "phases_b_deg",
                                 "pair_rate", "singles_a", "singles_b", "window",
                                 "integration", "metadata"},
                                "source");
  const int n = j.value("n", 3);
  multiport::SourceConfig cfg = multiport::SourceConfig::equal_superposition(n);
  if (j.contains("amplitudes")) cfg.amplitudes = j.at("amplitudes").get<std::vector<double>>();
  if (j.contains("phases_a_deg")) {
    cfg.phases_a = j.at("phases_a_deg").get<std::vector<double>>();
    for (double& p : cfg.phases_a) p *= kDegToRad;
  }
  if (j.contains("phases_b_deg")) {
    cfg.phases_b = j.at("phases_b_deg").get<std::vector<double>>();
    for (double& p : cfg.phases_b) p *= kDegToRad;
  }
  cfg.pair_rate = j.value("pair_rate", cfg.pair_rate);
  cfg.singles_a = j.value("singles_a", cfg.singles_a);
  cfg.singles_b = j.value("singles_b", cfg.singles_b);
  cfg.window = j.value("window", cfg.window);
  cfg.integration = j.value("integration", cfg.integration);
  if (j.contains("metadata")) {
    cfg.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
  }
  cfg.validate();
  return cfg;
}

Json source_to_cli_json(const multiport::SourceConfig& cfg) {
  std::vector<double> pa(cfg.phases_a), pb(cfg.phases_b);
  for (double& p : pa) p /= kDegToRad;
  for (double& p : pb) p /= kDegToRad;
  Json j{{"n", cfg.n},
         {"amplitudes", cfg.amplitudes},
         {"phases_a_deg", pa},
         {"phases_b_deg", pb},
         {"pair_rate", cfg.pair_rate},
         {"singles_a", cfg.singles_a},
         {"singles_b", cfg.singles_b},
         {"window", cfg.window},
         {"integration", cfg.integration}};
  if (!cfg.metadata.empty()) j["metadata"] = cfg.metadata;
  return j;
}

multiport::Unitary multiport_from_json(const Json& j, int default_n) {
  multiport::require_known_keys(j, {"preset", "n", "matrix"}, "multiport");
  if (j.contains("matrix")) {
    return multiport::unitary_from_json(j.at("matrix"));
  }
  const std::string preset = j.value("preset", "bellport");
  return preset_unitary(preset, j.value("n", default_n));
}

Json unitary_source_echo(const Json& j) {
  return j.contains("matrix") ? Json{{"matrix", j.at("matrix")}}
                              : Json{{"preset", j.value("preset", "bellport")},
                                     {"n", j.value("n", 3)}};
}

// ---------------------------------------------------------------------------
// compile

int cmd_compile(const std::string& config_path, const std::string& preset, int n,
                std::optional<double> extinction, const std::string& out) {
  const fs::path dir = ensure_out_dir(out);

  multiport::Matrix input;
  Json effective{{"command", "compile"}};
  if (!preset.empty()) {
    input = preset_unitary(preset, n).matrix();
    effective["preset"] = preset;
    effective["n"] = n;
  } else if (!config_path.empty()) {
    const Json j = load_json(config_path);
    multiport::require_known_keys(j, {"n", "entries"}, "unitary");
    const int dim = j.value("n", 0);
    if (dim < 1 || !j.contains("entries") ||
        j.at("entries").size() != static_cast<std::size_t>(dim) * dim) {
      throw std::invalid_argument("unitary: entries must hold n*n [re, im] pairs");
    }
    input.resize(dim, dim);
    for (int r = 0; r < dim; ++r) {
      for (int c = 0; c < dim; ++c) {
        const Json& e = j.at("entries").at(r * dim + c);
        input(r, c) = multiport::Complex(e.at(0).get<double>(), e.at(1).get<double>());
      }
    }
    effective["input"] = config_path;
    effective["n"] = dim;
  } else {
    throw std::invalid_argument("compile needs --config FILE or --preset NAME with -n");
  }

  if (!multiport::is_unitary(input, multiport::kUnitaryTol)) {
    const multiport::Matrix delta =
        input.adjoint() * input -
        multiport::Matrix::Identity(input.rows(), input.cols());
    Eigen::Index r = 0, c = 0;
    const double worst = delta.cwiseAbs().maxCoeff(&r, &c);
    std::cerr << "compile: input is not unitary; worst entry of U†U - I is ("
              << r << "," << c << ") with |value| = " << worst << "\n";
    return kExitValidation;
  }

  const multiport::Unitary u{input};
  const multiport::MeshSettings settings = multiport::compile_unitary(u);
  const multiport::Unitary realized = multiport::forward_unitary(settings);
  const double distance = multiport::distance_up_to_global_phase(u, realized);

  write_json_file(dir / "settings.json", multiport::mesh_settings_to_json(settings));
  write_json_file(dir / "realized.json", multiport::unitary_to_json(realized));

  Json report{{"n", u.dim()},
              {"units", settings.units.size()},
              {"round_trip_distance", distance}};
  if (extinction) {
    const multiport::RealizableResult nearest = multiport::nearest_realizable(
        u, multiport::Imperfections::extinction(*extinction));
    write_json_file(dir / "settings_clipped.json",
                    multiport::mesh_settings_to_json(nearest.settings));
    write_json_file(dir / "realized_clipped.json",
                    multiport::unitary_to_json(nearest.realized));
    report["extinction_dB"] = *extinction;
    report["clipped_distance"] = nearest.distance;
    effective["extinction_dB"] = *extinction;
  }
  write_json_file(dir / "report.json", report);
  write_json_file(dir / "effective_config.json", effective);

  std::cout << "compiled " << u.dim() << "-mode unitary into " << settings.units.size()
            << " units; round-trip distance " << distance << "\n";
  if (distance > multiport::kRoundTripTol) {
    std::cerr << "compile: round-trip distance " << distance << " exceeds "
              << multiport::kRoundTripTol << "\n";
    return kExitNumerical;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// scan

int cmd_scan(const std::string& config_path, const std::string& preset_override,
             std::uint64_t seed, bool seed_given, bool no_sampling,
             const std::string& out) {
  const fs::path dir = ensure_out_dir(out);
  const Json j = config_path.empty() ? Json::object() : load_json(config_path);
  multiport::require_known_keys(j,
                                {"source", "multiport", "multiport_a", "multiport_b",
                                 "grid", "sampling", "subtract_accidentals", "all_pairs",
                                 "seed"},
                                "scan config");

  const multiport::SourceConfig source =
      j.contains("source") ? source_from_cli_json(j.at("source"))
                           : multiport::SourceConfig::equal_superposition(3);

  const Json mp = preset_override.empty()
                      ? j.value("multiport", Json{{"preset", "bellport"}})
                      : Json{{"preset", preset_override}, {"n", source.n}};
  const multiport::Unitary u_a = j.contains("multiport_a") && preset_override.empty()
                                     ? multiport_from_json(j.at("multiport_a"), source.n)
                                     : multiport_from_json(mp, source.n);
  const multiport::Unitary u_b = j.contains("multiport_b") && preset_override.empty()
                                     ? multiport_from_json(j.at("multiport_b"), source.n)
                                     : multiport_from_json(mp, source.n);

  multiport::GridSpec grid;
  if (j.contains("grid")) {
    const Json& g = j.at("grid");
    multiport::require_known_keys(g, {"nx", "ny", "offset_x_deg", "offset_y_deg"}, "grid");
    grid.nx = g.value("nx", grid.nx);
    grid.ny = g.value("ny", grid.ny);
    grid.offset_x_deg = g.value("offset_x_deg", 0.0);
    grid.offset_y_deg = g.value("offset_y_deg", 0.0);
  }
  grid.validate();

  multiport::ScanOptions options;
  options.sampling = j.value("sampling", true) && !no_sampling;
  options.subtract_accidentals = j.value("subtract_accidentals", false);
  options.all_pairs = j.value("all_pairs", false);
  const std::uint64_t run_seed = seed_given ? seed : j.value("seed", std::uint64_t{1});

  const multiport::CorrelationMap map =
      multiport::scan_correlation_map(source, u_a, u_b, grid, options, run_seed);
  const multiport::ExtremaReport extrema = multiport::find_extrema(source, u_a, u_b, map);

  std::ostringstream csv;
  multiport::write_correlation_csv(csv, map);
  write_text(dir / "map.csv", csv.str());
  write_json_file(dir / "fits.json", multiport::correlation_sidecar(map, &extrema));

  Json effective{{"command", "scan"},
                 {"source", source_to_cli_json(source)},
                 {"multiport_a",
                  unitary_source_echo(j.contains("multiport_a") && preset_override.empty()
                                          ? j.at("multiport_a")
                                          : mp)},
                 {"multiport_b",
                  unitary_source_echo(j.contains("multiport_b") && preset_override.empty()
                                          ? j.at("multiport_b")
                                          : mp)},
                 {"grid", Json{{"nx", grid.nx},
                               {"ny", grid.ny},
                               {"offset_x_deg", grid.offset_x_deg},
                               {"offset_y_deg", grid.offset_y_deg}}},
                 {"sampling", options.sampling},
                 {"subtract_accidentals", options.subtract_accidentals},
                 {"all_pairs", options.all_pairs},
                 {"seed", run_seed}};
  write_json_file(dir / "effective_config.json", effective);

  std::cout << "scanned " << map.points() << " points over " << map.pairs.size()
            << " detector pairs; " << extrema.perfect_count
            << " perfect correlations found\n";
  for (std::size_t i = 0; i < extrema.offsets_deg.size(); ++i) {
    std::cout << "  pair (" << extrema.maxima[i].pair.a << "," << extrema.maxima[i].pair.b
              << ") max at (" << extrema.maxima[i].phi_x_deg << " deg, "
              << extrema.maxima[i].phi_y_deg << " deg), offset ("
              << extrema.offsets_deg[i][0] << ", " << extrema.offsets_deg[i][1] << ")\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// coverage

int cmd_coverage(const std::string& config_path, std::uint64_t seed, bool seed_given,
                 std::optional<long> samples_flag, std::optional<double> extinction,
                 const std::string& out) {
  const fs::path dir = ensure_out_dir(out);
  const Json j = config_path.empty() ? Json::object() : load_json(config_path);
  multiport::require_known_keys(
      j, {"n_values", "n_min", "n_max", "extinction_dB", "samples", "seed"},
      "coverage config");

  std::vector<int> n_values;
  if (j.contains("n_values")) {
    n_values = j.at("n_values").get<std::vector<int>>();
  } else {
    const int lo = j.value("n_min", 2);
    const int hi = j.value("n_max", 10);
    if (lo > hi) {
      throw std::invalid_argument("coverage: n_min must not exceed n_max");
    }
    for (int n = lo; n <= hi; ++n) n_values.push_back(n);
  }
  std::vector<double> extinctions = extinction
                                        ? std::vector<double>{*extinction}
                                        : j.value("extinction_dB",
                                                  std::vector<double>{20.0, 30.0, 40.0});
  const long samples = samples_flag ? *samples_flag : j.value("samples", 20000L);
  const std::uint64_t run_seed = seed_given ? seed : j.value("seed", std::uint64_t{1});

  const auto table = multiport::coverage_curve(n_values, extinctions, samples, run_seed);

  std::ostringstream csv;
  multiport::write_coverage_csv(csv, table);
  write_text(dir / "coverage.csv", csv.str());
  write_json_file(dir / "effective_config.json",
                  Json{{"command", "coverage"},
                       {"n_values", n_values},
                       {"extinction_dB", extinctions},
                       {"samples", samples},
                       {"seed", run_seed}});

  for (const multiport::CoverageEstimate& e : table) {
    std::cout << "n=" << e.n << " ER=" << e.extinction_dB << " dB: coverage "
              << e.fraction << " +- " << e.std_error << "\n";
  }
  return 0;
}

// ---------------------------------------------------------------------------
// stabilize

int cmd_stabilize(const std::string& config_path, std::uint64_t seed, bool seed_given,
                  const std::string& out) {
  const fs::path dir = ensure_out_dir(out);
  const Json j = config_path.empty() ? Json::object() : load_json(config_path);
  multiport::require_known_keys(j,
                                {"n", "wavelengths_nm", "gains", "dt", "duration",
                                 "drift_sigma", "visibility", "setpoints_deg", "seed",
                                 "fidelity_samples"},
                                "stabilize config");

  multiport::StabilizerConfig cfg;
  cfg.n = j.value("n", 3);
  if (j.contains("wavelengths_nm")) {
    const auto w = j.at("wavelengths_nm").get<std::vector<double>>();
    if (w.size() != 2) {
      throw std::invalid_argument("stabilize: wavelengths_nm needs exactly 2 values");
    }
    cfg.wavelength_1_nm = w[0];
    cfg.wavelength_2_nm = w[1];
  }
  if (j.contains("gains")) {
    const Json& g = j.at("gains");
    multiport::require_known_keys(g, {"kp", "ki", "kd"}, "gains");
    cfg.gains.kp = g.value("kp", cfg.gains.kp);
    cfg.gains.ki = g.value("ki", cfg.gains.ki);
    cfg.gains.kd = g.value("kd", cfg.gains.kd);
  }
  cfg.dt = j.value("dt", cfg.dt);
  cfg.duration = j.value("duration", cfg.duration);
  cfg.drift.sigma = j.value("drift_sigma", cfg.drift.sigma);
  cfg.visibility = j.value("visibility", cfg.visibility);
  if (j.contains("setpoints_deg")) {
    cfg.setpoints = j.at("setpoints_deg").get<std::vector<double>>();
    for (double& s : cfg.setpoints) s *= kDegToRad;
  }
  cfg.validate();
  const std::uint64_t run_seed = seed_given ? seed : j.value("seed", std::uint64_t{1});
  const long fidelity_samples = j.value("fidelity_samples", 20000L);

  const multiport::LockTelemetry tel = multiport::run_lock(cfg, run_seed);

  std::ostringstream csv;
  multiport::write_telemetry_csv(csv, tel);
  write_text(dir / "telemetry.csv", csv.str());

  double worst_rms = 0.0;
  for (double rms : tel.residual_rms) worst_rms = std::max(worst_rms, rms);
  const double fid = multiport::lock_quality_to_fidelity(
      worst_rms, multiport::SourceConfig::equal_superposition(cfg.n), fidelity_samples,
      run_seed + 1);

  Json summary{{"loops", tel.loops},
               {"steps", tel.time.size()},
               {"residual_rms", tel.residual_rms},
               {"worst_residual_rms", worst_rms},
               {"state_fidelity_at_worst_rms", fid},
               {"required_detectors", multiport::required_detectors(cfg.n)}};
  write_json_file(dir / "summary.json", summary);

  std::vector<double> setpoints_deg(cfg.setpoints);
  for (double& s : setpoints_deg) s /= kDegToRad;
  write_json_file(
      dir / "effective_config.json",
      Json{{"command", "stabilize"},
           {"n", cfg.n},
           {"wavelengths_nm", {cfg.wavelength_1_nm, cfg.wavelength_2_nm}},
           {"gains", Json{{"kp", cfg.gains.kp}, {"ki", cfg.gains.ki}, {"kd", cfg.gains.kd}}},
           {"dt", cfg.dt},
           {"duration", cfg.duration},
           {"drift_sigma", cfg.drift.sigma},
           {"visibility", cfg.visibility},
           {"setpoints_deg", setpoints_deg},
           {"fidelity_samples", fidelity_samples},
           {"seed", run_seed}});

  std::cout << "locked " << tel.loops << " loops for "
            << tel.time.size() * cfg.dt << " s; worst residual RMS " << worst_rms
            << " rad; state fidelity at that jitter " << fid << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// report

int cmd_report(int n, long samples, std::optional<double> extinction, std::uint64_t seed,
               const std::string& out) {
  if (n < 2) {
    throw std::invalid_argument("report: -n must be >= 2");
  }
  const fs::path dir = ensure_out_dir(out);

  const double s_n = multiport::phase_sensitivity(n);
  const double s_2 = multiport::phase_sensitivity(2);
  const double measured_mean = 0.703;  // device-averaged slope at this dimension
  const double damped = n == 3 ? multiport::phase_sensitivity(3, measured_mean / s_n) : 0.0;

  const double er = extinction ? *extinction : 14.2;
  const multiport::CoverageEstimate cov = multiport::estimate_coverage(n, er, samples, seed);

  const double ebits = multiport::entanglement_entropy(
      multiport::entangled_state(multiport::SourceConfig::equal_superposition(n)));

  Json detectors = Json::array();
  for (int dim = 2; dim <= std::max(6, n); ++dim) {
    detectors.push_back(Json{{"n", dim}, {"detectors", multiport::required_detectors(dim)}});
  }

  Json report{{"n", n},
              {"phase_sensitivity", Json{{"S_n", s_n},
                                         {"S_2", s_2},
                                         {"ratio", s_n / s_2}}},
              {"coverage", Json{{"extinction_dB", er},
                                {"samples", cov.samples},
                                {"fraction", cov.fraction},
                                {"std_error", cov.std_error}}},
              {"entanglement_entropy_ebits", ebits},
              {"stabilization_detectors", detectors}};
  if (n == 3) {
    report["phase_sensitivity"]["damped_to_measured_mean"] = damped;
    report["phase_sensitivity"]["gamma_at_measured_mean"] = damped / s_2;
  }
  write_json_file(dir / "report.json", report);
  write_json_file(dir / "effective_config.json",
                  Json{{"command", "report"},
                       {"n", n},
                       {"samples", samples},
                       {"extinction_dB", er},
                       {"seed", seed}});

  std::cout << "phase sensitivity: S_" << n << " = " << s_n << ", S_2 = " << s_2
            << ", ratio = " << s_n / s_2 << "\n";
  if (n == 3) {
    std::cout << "  at the measured mean slope " << measured_mean
              << " the advantage drops to " << damped / s_2 << "\n";
  }
  std::cout << "coverage at " << er << " dB: " << cov.fraction << " +- " << cov.std_error
            << " (" << cov.samples << " samples)\n";
  std::cout << "entanglement of the equal superposition: " << ebits << " e-bits\n";
  std::cout << "stabilization detectors: 2(n-1), e.g. n=3 needs "
            << multiport::required_detectors(3) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multiport-lab: entangled-quNit multiport experiment toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string preset;
  int dim = 3;
  std::uint64_t seed = 1;
  long samples = 20000;
  double extinction_db = 0.0;
  bool no_sampling = false;

  auto* compile = app.add_subcommand("compile", "compile a unitary into mesh settings");
  compile->add_option("--config", config_path, "unitary JSON file");
  compile->add_option("--preset", preset, "bellport or identity");
  compile->add_option("-n,--dim", dim, "dimension for --preset");
  auto* compile_ext =
      compile->add_option("--extinction", extinction_db, "also clip at this extinction (dB)");
  compile->add_option("--out", out_dir, "output directory");

  auto* scan = app.add_subcommand("scan", "scan the two-quNit correlation space");
  scan->add_option("--config", config_path, "scan config JSON");
  scan->add_option("--preset", preset, "multiport preset for both sides");
  auto* scan_seed = scan->add_option("--seed", seed, "master seed");
  scan->add_flag("--no-sampling", no_sampling, "expected probabilities only");
  scan->add_option("--out", out_dir, "output directory");

  auto* coverage = app.add_subcommand("coverage", "estimate unitary-space coverage");
  coverage->add_option("--config", config_path, "coverage config JSON");
  auto* cov_seed = coverage->add_option("--seed", seed, "master seed");
  auto* cov_samples = coverage->add_option("--samples", samples, "samples per cell");
  auto* cov_ext =
      coverage->add_option("--extinction", extinction_db, "single extinction value (dB)");
  coverage->add_option("--out", out_dir, "output directory");

  auto* stabilize = app.add_subcommand("stabilize", "simulate the phase lock");
  stabilize->add_option("--config", config_path, "stabilizer config JSON");
  auto* stab_seed = stabilize->add_option("--seed", seed, "master seed");
  stabilize->add_option("--out", out_dir, "output directory");

  auto* report = app.add_subcommand("report", "sensitivity, coverage and scaling summary");
  report->add_option("-n,--dim", dim, "dimension");
  report->add_option("--samples", samples, "coverage samples");
  auto* rep_ext =
      report->add_option("--extinction", extinction_db, "coverage extinction (dB)");
  report->add_option("--seed", seed, "seed");
  report->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (compile->parsed()) {
      return cmd_compile(config_path, preset, dim,
                         *compile_ext ? std::optional<double>(extinction_db) : std::nullopt,
                         out_dir);
    }
    if (scan->parsed()) {
      return cmd_scan(config_path, preset, seed, static_cast<bool>(*scan_seed), no_sampling,
                      out_dir);
    }
    if (coverage->parsed()) {
      return cmd_coverage(config_path, seed, static_cast<bool>(*cov_seed),
                          *cov_samples ? std::optional<long>(samples) : std::nullopt,
                          *cov_ext ? std::optional<double>(extinction_db) : std::nullopt,
                          out_dir);
    }
    if (stabilize->parsed()) {
      return cmd_stabilize(config_path, seed, static_cast<bool>(*stab_seed), out_dir);
    }
    if (report->parsed()) {
      return cmd_report(dim, samples,
                        *rep_ext ? std::optional<double>(extinction_db) : std::nullopt, seed,
                        out_dir);
    }
  } catch (const numerical_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kExitValidation;
  } catch (const Json::exception& e) {
    std::cerr << "invalid config: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return 0;
}
