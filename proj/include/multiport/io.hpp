// JSON serialization of the core types and CSV export of scan, coverage and
// telemetry results. All numeric output is locale-independent.

#pragma once

#include "multiport/coverage.hpp"
#include "multiport/experiment.hpp"
#include "multiport/linalg.hpp"
#include "multiport/mesh.hpp"
#include "multiport/source.hpp"
#include "multiport/stabilize.hpp"

#include <iosfwd>
#include <string>
#include <vector>

// vendored single-header nlohmann/json
#include "json.hpp"

namespace multiport {

using Json = nlohmann::json;

/// {"n": int, "entries": [[re, im], ...]} with entries row-major.
Json unitary_to_json(const Unitary& u);
Unitary unitary_from_json(const Json& j);

/// {"n": int, "units": [{"pair","theta","phi"}...], "output_phases": [...]},
/// angles in radians.
Json mesh_settings_to_json(const MeshSettings& settings);
MeshSettings mesh_settings_from_json(const Json& j);

/// Angles in radians, rates in s⁻¹, window in seconds.
Json source_config_to_json(const SourceConfig& config);
SourceConfig source_config_from_json(const Json& j);

/// 17-significant-digit, locale-independent formatting.
std::string format_double(double value);

/// Columns: phi_x_deg, phi_y_deg, detector_a, detector_b, expected_prob,
/// sampled_counts (empty when sampling was off). Rows ordered by
/// (phi_x, phi_y, pair).
void write_correlation_csv(std::ostream& os, const CorrelationMap& map);

/// Meta plus per-(pair, phi_x) slice fits; extrema report when provided.
Json correlation_sidecar(const CorrelationMap& map, const ExtremaReport* extrema);

/// Columns: n, extinction_dB, samples, fraction, std_error.
void write_coverage_csv(std::ostream& os, const std::vector<CoverageEstimate>& table);

/// Columns: t, loop_id, phase_error_rad, actuation_rad, det_signal_w1, det_signal_w2.
void write_telemetry_csv(std::ostream& os, const LockTelemetry& telemetry);

/// Rejects any key of `j` outside `allowed`; context names the offender.
void require_known_keys(const Json& j, const std::vector<std::string>& allowed,
                        const std::string& context);

}  // namespace multiport
