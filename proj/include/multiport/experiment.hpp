// Detection and scanning engine: joint probabilities, the correlation-space
// scan with per-slice fits, extrema identification, detector-shift
// equivalence, phase sensitivity and subspace fidelities.

#pragma once

#include "multiport/linalg.hpp"
#include "multiport/source.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace multiport {

/// |⟨ab|(U_A⊗U_B)|ψ⟩|². Throws if an outcome index is out of range.
double joint_probability(const StateVector& state, const Unitary& u_a,
                         const Unitary& u_b, int a, int b);

/// All outcome probabilities at once; entry (a,b) = joint_probability(...,a,b).
Eigen::MatrixXd outcome_probabilities(const StateVector& state, const Unitary& u_a,
                                      const Unitary& u_b);

struct PairLabel {
  int a = 0;
  int b = 0;
};

/// Scan grid over the two scanned relative phases. Axis values are
/// equidistant steps covering [0°, 360°): x_deg(i) = i·360/nx.
struct GridSpec {
  int nx = 36;
  int ny = 30;
  double offset_x_deg = 0.0;  // calibration offset added to the φx phase
  double offset_y_deg = 0.0;

  double x_deg(int i) const { return i * 360.0 / nx; }
  double y_deg(int j) const { return j * 360.0 / ny; }
  void validate() const;
};

struct ScanOptions {
  bool sampling = true;             // Poisson-sample counts at pair_rate·integration
  bool all_pairs = false;           // track all n² pairs instead of (0, b)
  bool subtract_accidentals = false;  // subtract the known floor from sampled counts
};

struct CorrelationMap {
  std::vector<double> phi_x_deg;  // nx values
  std::vector<double> phi_y_deg;  // ny values
  std::vector<PairLabel> pairs;
  /// expected probability, indexed [(ix·ny + iy)·pairs.size() + p]
  std::vector<double> expected;
  /// sampled counts in the same layout; empty when sampling is off
  std::vector<double> sampled;

  double pair_rate = 0.0;
  double integration = 0.0;
  double accidental = 0.0;        // floor rate per pair (s⁻¹)
  bool subtracted = false;
  std::uint64_t seed = 0;

  std::size_t points() const { return phi_x_deg.size() * phi_y_deg.size(); }
  double phi_x_rad(int ix) const { return phi_x_deg[ix] * std::numbers::pi / 180.0; }
  double phi_y_rad(int iy) const { return phi_y_deg[iy] * std::numbers::pi / 180.0; }
  double expected_at(int ix, int iy, std::size_t p) const {
    return expected[(static_cast<std::size_t>(ix) * phi_y_deg.size() + iy) * pairs.size() + p];
  }
};

/// Scan the correlation space: the scanned relative phases are
/// (φ₁−φ₁') = φx + offset and (φ₂−φ₂') = φy + offset with (φ₀−φ₀') = 0 as
/// reference. Expected probabilities come from the exact model; counts are
/// Poisson-sampled per point with seeds derived from the master seed, so
/// results are identical for any execution order or thread count.
/// Requires n ≥ 3 (two independent scanned phases).
CorrelationMap scan_correlation_map(const SourceConfig& config, const Unitary& u_a,
                                    const Unitary& u_b, const GridSpec& grid,
                                    const ScanOptions& options, std::uint64_t seed);

/// Serial reference implementation; must produce bit-identical maps.
CorrelationMap scan_correlation_map_serial(const SourceConfig& config, const Unitary& u_a,
                                           const Unitary& u_b, const GridSpec& grid,
                                           const ScanOptions& options, std::uint64_t seed);

/// Max over grid points of |Σ_pairs expected − 1|. Meaningful for maps that
/// track all n² pairs.
double normalization_error(const CorrelationMap& map);

/// offset + amplitude·cos(φy − phase0) fitted by the first-harmonic Fourier
/// projection (the least-squares solution on a uniform full-period grid).
struct FittedSignal {
  double offset = 0.0;
  double amplitude = 0.0;
  double phase0 = 0.0;
  double rms_residual = 0.0;
};

/// Throws if fewer than 4 points are given.
FittedSignal fit_slice(const std::vector<double>& values,
                       const std::vector<double>& grid_y_rad);

struct Extremum {
  PairLabel pair;
  double phi_x_deg = 0.0;
  double phi_y_deg = 0.0;
  double probability = 0.0;
};

struct PermutationCorrelation {
  std::vector<int> sigma;    // b = sigma[a]
  double max_total = 0.0;    // max over phases of Σ_a P(a, sigma(a))
  bool perfect = false;      // max_total reaches 1
};

struct ExtremaReport {
  std::vector<Extremum> maxima;                    // one per tracked pair
  std::vector<std::array<double, 2>> offsets_deg;  // maxima relative to the first pair
  std::vector<PermutationCorrelation> permutations;
  int perfect_count = 0;                           // number of perfect correlations found
};

/// Per tracked pair, the global maximum refined by local optimization on the
/// exact model, the pairwise offsets between maxima, and a census of which of
/// the n! possible detector correlations are realized perfectly.
ExtremaReport find_extrema(const SourceConfig& config, const Unitary& u_a,
                           const Unitary& u_b, const CorrelationMap& map);

enum class ShiftCheck { kHolds, kViolated, kNotApplicable };

/// Verifies P_(a,b+1)(φx, φy) = P_(a,b)(φx + 2π/n, φy + 2·2π/n) for all pairs
/// on random phase points. Exact for Fourier multiports on side B; reports
/// kNotApplicable when u_b is not a Fourier transform (up to global phase).
ShiftCheck detector_shift_equivalence(const SourceConfig& config, const Unitary& u_a,
                                      const Unitary& u_b, int num_points,
                                      std::uint64_t seed, double tol = 1e-10);

/// Maximum of |dP/dφ| along the diagonal path δ_k = k·φ for the Bellport
/// configuration, with probabilities normalized over the n tracked pairs so
/// the ideal pattern peaks at 1. `visibility` damps the fringe contrast about
/// its mean; the ideal value scales linearly with it. Dense central
/// differences over the exact model.
double phase_sensitivity(int n, double visibility = 1.0, int grid_points = 200001);

/// Projection of the state onto span{|jj⟩,|kk⟩,|jk⟩,|kj⟩}, renormalized and
/// compared against the Bell state (|jj⟩+|kk⟩)/√2. Throws for j == k or a
/// zero-norm projection.
double subspace_fidelity(const StateVector& state, int j, int k);

}  // namespace multiport
