#include "multiport/io.hpp"

#include <charconv>
#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace multiport {

namespace {

double require_number(const Json& j, const std::string& key, const std::string& context) {
  if (!j.contains(key) || !j.at(key).is_number()) {
    throw std::invalid_argument(context + ": missing or non-numeric \"" + key + "\"");
  }
  return j.at(key).get<double>();
}

std::vector<double> require_array(const Json& j, const std::string& key,
                                  const std::string& context) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw std::invalid_argument(context + ": missing or non-array \"" + key + "\"");
  }
  return j.at(key).get<std::vector<double>>();
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value,
                                 std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

Json unitary_to_json(const Unitary& u) {
  Json entries = Json::array();
  const Matrix& m = u.matrix();
  for (int r = 0; r < u.dim(); ++r) {
    for (int c = 0; c < u.dim(); ++c) {
      entries.push_back(Json::array({m(r, c).real(), m(r, c).imag()}));
    }
  }
  return Json{{"n", u.dim()}, {"entries", std::move(entries)}};
}

Unitary unitary_from_json(const Json& j) {
  require_known_keys(j, {"n", "entries"}, "unitary");
  const int n = static_cast<int>(require_number(j, "n", "unitary"));
  if (n < 1) {
    throw std::invalid_argument("unitary: n must be >= 1");
  }
  const Json& entries = j.at("entries");
  if (!entries.is_array() || entries.size() != static_cast<std::size_t>(n) * n) {
    throw std::invalid_argument("unitary: entries must hold n*n [re, im] pairs");
  }
  Matrix m(n, n);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const Json& e = entries.at(r * n + c);
      if (!e.is_array() || e.size() != 2) {
        throw std::invalid_argument("unitary: each entry must be an [re, im] pair");
      }
      m(r, c) = Complex(e.at(0).get<double>(), e.at(1).get<double>());
    }
  }
  return Unitary(std::move(m));
}

Json mesh_settings_to_json(const MeshSettings& settings) {
  Json units = Json::array();
  for (const MeshUnit& unit : settings.units) {
    units.push_back(Json{{"pair", unit.pair},
                         {"theta", unit.setting.theta},
                         {"phi", unit.setting.phi}});
  }
  return Json{{"n", settings.n},
              {"units", std::move(units)},
              {"output_phases", settings.output_phases}};
}

MeshSettings mesh_settings_from_json(const Json& j) {
  require_known_keys(j, {"n", "units", "output_phases"}, "mesh settings");
  MeshSettings settings;
  settings.n = static_cast<int>(require_number(j, "n", "mesh settings"));
  for (const Json& u : j.at("units")) {
    require_known_keys(u, {"pair", "theta", "phi"}, "mesh unit");
    MeshUnit unit;
    unit.pair = static_cast<int>(require_number(u, "pair", "mesh unit"));
    unit.setting.theta = require_number(u, "theta", "mesh unit");
    unit.setting.phi = require_number(u, "phi", "mesh unit");
    settings.units.push_back(unit);
  }
  settings.output_phases = require_array(j, "output_phases", "mesh settings");
  return settings;
}

Json source_config_to_json(const SourceConfig& config) {
  Json j{{"n", config.n},
         {"amplitudes", config.amplitudes},
         {"phases_a", config.phases_a},
         {"phases_b", config.phases_b},
         {"pair_rate", config.pair_rate},
         {"singles_a", config.singles_a},
         {"singles_b", config.singles_b},
         {"window", config.window},
         {"integration", config.integration}};
  if (!config.metadata.empty()) {
    j["metadata"] = config.metadata;
  }
  return j;
}

SourceConfig source_config_from_json(const Json& j) {
  require_known_keys(j,
                     {"n", "amplitudes", "phases_a", "phases_b", "pair_rate", "singles_a",
                      "singles_b", "window", "integration", "metadata"},
                     "source config");
  SourceConfig config;
  config.n = static_cast<int>(require_number(j, "n", "source config"));
  config.amplitudes = require_array(j, "amplitudes", "source config");
  if (j.contains("phases_a")) config.phases_a = require_array(j, "phases_a", "source config");
  else config.phases_a.assign(config.amplitudes.size(), 0.0);
  if (j.contains("phases_b")) config.phases_b = require_array(j, "phases_b", "source config");
  else config.phases_b.assign(config.amplitudes.size(), 0.0);
  if (j.contains("pair_rate")) config.pair_rate = require_number(j, "pair_rate", "source config");
  if (j.contains("singles_a")) config.singles_a = require_number(j, "singles_a", "source config");
  if (j.contains("singles_b")) config.singles_b = require_number(j, "singles_b", "source config");
  if (j.contains("window")) config.window = require_number(j, "window", "source config");
  if (j.contains("integration"))
    config.integration = require_number(j, "integration", "source config");
  if (j.contains("metadata")) {
    config.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
  }
  config.validate();
  return config;
}

void write_correlation_csv(std::ostream& os, const CorrelationMap& map) {
  os << "phi_x_deg,phi_y_deg,detector_a,detector_b,expected_prob,sampled_counts\n";
  const std::size_t ny = map.phi_y_deg.size();
  const std::size_t npairs = map.pairs.size();
  for (std::size_t ix = 0; ix < map.phi_x_deg.size(); ++ix) {
    for (std::size_t iy = 0; iy < ny; ++iy) {
      const std::size_t base = (ix * ny + iy) * npairs;
      for (std::size_t p = 0; p < npairs; ++p) {
        os << format_double(map.phi_x_deg[ix]) << ',' << format_double(map.phi_y_deg[iy])
           << ',' << map.pairs[p].a << ',' << map.pairs[p].b << ','
           << format_double(map.expected[base + p]) << ',';
        if (!map.sampled.empty()) {
          os << format_double(map.sampled[base + p]);
        }
        os << '\n';
      }
    }
  }
}

Json correlation_sidecar(const CorrelationMap& map, const ExtremaReport* extrema) {
  Json meta{{"pair_rate", map.pair_rate},
            {"integration", map.integration},
            {"accidental_rate", map.accidental},
            {"accidentals_subtracted", map.subtracted},
            {"seed", map.seed},
            {"points", map.points()},
            {"sampling", !map.sampled.empty()}};

  // First-harmonic fit per (pair, phi_x) slice.
  std::vector<double> grid_y_rad(map.phi_y_deg.size());
  for (std::size_t j = 0; j < grid_y_rad.size(); ++j) {
    grid_y_rad[j] = map.phi_y_deg[j] * std::numbers::pi / 180.0;
  }
  Json fits = Json::array();
  const std::size_t ny = map.phi_y_deg.size();
  for (std::size_t p = 0; p < map.pairs.size(); ++p) {
    for (std::size_t ix = 0; ix < map.phi_x_deg.size(); ++ix) {
      std::vector<double> slice(ny);
      for (std::size_t iy = 0; iy < ny; ++iy) {
        slice[iy] = map.expected[(ix * ny + iy) * map.pairs.size() + p];
      }
      const FittedSignal fit = fit_slice(slice, grid_y_rad);
      fits.push_back(Json{{"detector_a", map.pairs[p].a},
                          {"detector_b", map.pairs[p].b},
                          {"phi_x_deg", map.phi_x_deg[ix]},
                          {"offset", fit.offset},
                          {"amplitude", fit.amplitude},
                          {"phase0_rad", fit.phase0},
                          {"rms_residual", fit.rms_residual}});
    }
  }

  Json out{{"meta", std::move(meta)}, {"fits", std::move(fits)}};
  if (extrema != nullptr) {
    Json maxima = Json::array();
    for (const Extremum& e : extrema->maxima) {
      maxima.push_back(Json{{"detector_a", e.pair.a},
                            {"detector_b", e.pair.b},
                            {"phi_x_deg", e.phi_x_deg},
                            {"phi_y_deg", e.phi_y_deg},
                            {"probability", e.probability}});
    }
    Json offsets = Json::array();
    for (const auto& o : extrema->offsets_deg) {
      offsets.push_back(Json::array({o[0], o[1]}));
    }
    Json perms = Json::array();
    for (const PermutationCorrelation& pc : extrema->permutations) {
      perms.push_back(Json{{"sigma", pc.sigma}, {"max_total", pc.max_total},
                           {"perfect", pc.perfect}});
    }
    out["extrema"] = Json{{"maxima", std::move(maxima)},
                          {"offsets_deg", std::move(offsets)},
                          {"permutations", std::move(perms)},
                          {"perfect_count", extrema->perfect_count}};
  }
  return out;
}

void write_coverage_csv(std::ostream& os, const std::vector<CoverageEstimate>& table) {
  os << "n,extinction_dB,samples,fraction,std_error\n";
  for (const CoverageEstimate& e : table) {
    os << e.n << ',' << format_double(e.extinction_dB) << ',' << e.samples << ','
       << format_double(e.fraction) << ',' << format_double(e.std_error) << '\n';
  }
}

void write_telemetry_csv(std::ostream& os, const LockTelemetry& telemetry) {
  os << "t,loop_id,phase_error_rad,actuation_rad,det_signal_w1,det_signal_w2\n";
  for (std::size_t step = 0; step < telemetry.time.size(); ++step) {
    for (int loop = 0; loop < telemetry.loops; ++loop) {
      os << format_double(telemetry.time[step]) << ',' << loop << ','
         << format_double(telemetry.phase_error[loop][step]) << ','
         << format_double(telemetry.actuation[loop][step]) << ','
         << format_double(telemetry.signal_w1[loop][step]) << ','
         << format_double(telemetry.signal_w2[loop][step]) << '\n';
    }
  }
}

void require_known_keys(const Json& j, const std::vector<std::string>& allowed,
                        const std::string& context) {
  if (!j.is_object()) {
    throw std::invalid_argument(context + ": expected a JSON object");
  }
  for (const auto& item : j.items()) {
    bool known = false;
    for (const std::string& key : allowed) {
      if (item.key() == key) {
        known = true;
        break;
      }
    }
    if (!known) {
      throw std::invalid_argument(context + ": unknown key \"" + item.key() + "\"");
    }
  }
}

}  // namespace multiport
