// Entangled-state source model: amplitudes, relative phases, phase drift and
// accidental-coincidence noise of the in-fiber pair source.

#pragma once

#include "multiport/linalg.hpp"

#include <map>
#include <string>
#include <vector>

namespace multiport {

struct SourceConfig {
  int n = 3;
  std::vector<double> amplitudes;   // A_k, Σ A_k² = 1
  std::vector<double> phases_a;     // φ_k  (radians)
  std::vector<double> phases_b;     // φ'_k (radians)
  double pair_rate = 225.0;         // detected pairs per second, all outputs
  double singles_a = 0.0;           // singles per second per detector, side A
  double singles_b = 0.0;
  double window = 2.5e-9;           // coincidence window (s)
  double integration = 8.0;         // seconds per measurement point
  std::map<std::string, std::string> metadata;  // wavelengths etc., not used in the math

  /// Equal-amplitude config with zero phases and the defaults above.
  static SourceConfig equal_superposition(int n);

  /// Throws std::invalid_argument on any violated invariant.
  void validate() const;
};

/// Phase random walk: standard deviation sigma per √second on each phase.
struct DriftModel {
  double sigma = 0.5;  // rad/√s; free parameter, no measured value exists
};

/// Σ A_k e^{i(φ_k−φ'_k)} |kk⟩ over the n×n bipartite basis.
StateVector entangled_state(const SourceConfig& config);

/// Each phase gains an independent Gaussian increment of std sigma·√dt,
/// reduced mod 2π. Deterministic per seed.
std::vector<double> apply_drift(const std::vector<double>& phases, double dt,
                                const DriftModel& model, std::uint64_t seed);

/// Accidental coincidence rate per detector pair: singles_a · singles_b · window.
double accidental_rate(double singles_a, double singles_b, double window);

}  // namespace multiport
