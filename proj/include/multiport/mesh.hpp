// Programmable multiport model: MZI transfer matrices, Reck-triangle
// compilation of a unitary into device settings, and the forward model
// reconstructing the realized transform under imperfections.

#pragma once

#include "multiport/linalg.hpp"

#include <limits>
#include <optional>
#include <vector>

namespace multiport {

/// One Mach-Zehnder unit: internal differential phase theta and external
/// input phase phi, both reduced mod 2π. Cross-coupling power is
/// R(theta) = sin²(theta/2); theta=0 is the bar state, theta=π the cross state.
struct MziSetting {
  double theta = 0.0;
  double phi = 0.0;
};

/// A unit placed on adjacent modes (pair, pair+1) of the triangle.
struct MeshUnit {
  int pair = 0;
  MziSetting setting;
};

/// Compiled form of an n×n unitary: n(n−1)/2 MZI units in light-path order
/// plus n output phases. Houses the full n² free real parameters.
struct MeshSettings {
  int n = 0;
  std::vector<MeshUnit> units;
  std::vector<double> output_phases;
};

/// Cross-coupling powers of the two physical couplers of one MZI, each in
/// (0,1); 0.5 is the ideal 50/50 coupler.
struct CouplerPair {
  double eta1 = 0.5;
  double eta2 = 0.5;
};

/// Reachable cross-coupling interval [lo, hi].
struct ReflectivityBounds {
  double lo = 0.0;
  double hi = 1.0;
};

/// ε = 1/(1 + 10^(dB/10)); the device reaches cross-coupling only within
/// [ε, 1−ε]. Infinite input gives the ideal [0, 1]. Non-positive finite
/// input rejected.
ReflectivityBounds reflectivity_bounds(double extinction_dB);

/// Fringe visibility of an MZI with reflectivity confined to [ε, 1−ε].
double extinction_dB_to_visibility(double extinction_dB);
/// Inverse conversion, ER = (1+V)/(1−V) expressed in dB.
double visibility_to_extinction_dB(double visibility);

/// Device imperfection model. The default is reflectivity clipping from a
/// global extinction ratio; per-unit extinction ratios and the physical
/// coupler model are opt-in.
class Imperfections {
 public:
  static Imperfections ideal();
  static Imperfections extinction(double dB);
  static Imperfections per_unit_extinction(std::vector<double> dBs);
  static Imperfections couplers(std::vector<CouplerPair> per_unit);

  bool is_ideal() const { return ideal_; }
  bool has_couplers() const { return !couplers_.empty(); }
  double extinction_dB() const { return extinction_dB_; }
  const std::vector<CouplerPair>& coupler_pairs() const { return couplers_; }

  /// Reachable reflectivity interval of unit `index`.
  ReflectivityBounds bounds_for_unit(std::size_t index) const;

 private:
  Imperfections() = default;
  bool ideal_ = true;
  double extinction_dB_ = std::numeric_limits<double>::infinity();
  std::vector<double> per_unit_dB_;
  std::vector<CouplerPair> couplers_;
};

/// 2×2 transfer matrix of one MZI: coupler · phase(theta) · coupler · phase(phi),
/// with phi on the first input mode. Ideal couplers are 50/50; when a coupler
/// pair is given the asymmetric coupler matrices are used instead and the
/// reachable cross-coupling shrinks to a strict subinterval of (0,1).
Eigen::Matrix2cd mzi_unitary(const MziSetting& setting,
                             std::optional<CouplerPair> couplers = std::nullopt);

/// Reachable cross-coupling interval of an MZI with the given couplers.
ReflectivityBounds coupler_reflectivity_bounds(const CouplerPair& couplers);

/// Reck triangular decomposition. Sub-diagonal entries are nulled with 2×2
/// rotations on adjacent mode pairs, bottom row of each remaining block first,
/// left to right within the row (each column is visited bottom-up); the
/// residual diagonal becomes output_phases. Entries already below 1e-14 get a
/// bar-state unit with zero phase. Throws on non-unitary input.
MeshSettings compile_unitary(const Unitary& u);

/// Ordered product of the embedded MZI matrices and the output phase diagonal.
/// With extinction imperfections each unit's cross-coupling is clipped into
/// reflectivity_bounds; with coupler imperfections the physical coupler
/// matrices are used. The result is unitary for any input.
Unitary forward_unitary(const MeshSettings& settings,
                        const Imperfections& imperfections = Imperfections::ideal());

struct RealizableResult {
  MeshSettings settings;
  Unitary realized;
  double distance = 0.0;
};

/// Compile u, clip every unit's reflectivity into the reachable interval,
/// and report the realized unitary together with its distance from u
/// (up to global phase). Distance is 0 iff no clipping occurred.
RealizableResult nearest_realizable(const Unitary& u, const Imperfections& imperfections);

}  // namespace multiport
