// Monte Carlo estimate of the coverage metric: the fraction of the unitary
// group a finite-extinction mesh can realize.

#pragma once

#include "multiport/linalg.hpp"
#include "multiport/mesh.hpp"

#include <cstdint>
#include <vector>

namespace multiport {

struct CoverageEstimate {
  int n = 0;
  double extinction_dB = 0.0;
  long samples = 0;
  double fraction = 0.0;
  double std_error = 0.0;
};

/// Draw Haar-random unitaries, compile each onto the mesh and accept iff every
/// unit's cross-coupling lies inside reflectivity_bounds(extinction_dB).
/// Per-sample seeds are derived from the master seed, so the estimate is
/// deterministic and identical for any worker count. OpenMP over samples.
CoverageEstimate estimate_coverage(int n, double extinction_dB, long samples,
                                   std::uint64_t seed);

/// Serial reference implementation; must produce the identical fraction.
CoverageEstimate estimate_coverage_serial(int n, double extinction_dB, long samples,
                                          std::uint64_t seed);

/// Grid of estimates for plotting coverage vs dimension per extinction value.
std::vector<CoverageEstimate> coverage_curve(const std::vector<int>& n_values,
                                             const std::vector<double>& extinction_dBs,
                                             long samples, std::uint64_t seed);

}  // namespace multiport
