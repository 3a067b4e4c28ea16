#include "multiport/coverage.hpp"

#include <omp.h>

#include <cmath>
#include <stdexcept>

namespace multiport {

namespace {

void validate(int n, double extinction_dB, long samples) {
  if (n < 2) {
    throw std::invalid_argument("estimate_coverage: n must be >= 2");
  }
  if (samples < 1) {
    throw std::invalid_argument("estimate_coverage: samples must be >= 1");
  }
  reflectivity_bounds(extinction_dB);
}

bool sample_accepted(int n, const ReflectivityBounds& bounds, std::uint64_t sample_seed) {
  const Unitary u = haar_random_unitary(n, sample_seed);
  const MeshSettings settings = compile_unitary(u);
  for (const MeshUnit& unit : settings.units) {
    const double s = std::sin(unit.setting.theta / 2.0);
    const double r = s * s;
    if (r < bounds.lo || r > bounds.hi) return false;
  }
  return true;
}

CoverageEstimate finish(int n, double extinction_dB, long samples, long accepted) {
  CoverageEstimate est;
  est.n = n;
  est.extinction_dB = extinction_dB;
  est.samples = samples;
  est.fraction = static_cast<double>(accepted) / static_cast<double>(samples);
  est.std_error = std::sqrt(est.fraction * (1.0 - est.fraction) / static_cast<double>(samples));
  return est;
}

}  // namespace

CoverageEstimate estimate_coverage(int n, double extinction_dB, long samples,
                                   std::uint64_t seed) {
  validate(n, extinction_dB, samples);
  const ReflectivityBounds bounds = reflectivity_bounds(extinction_dB);
  long accepted = 0;
#pragma omp parallel for schedule(static) reduction(+ : accepted)
  for (long i = 0; i < samples; ++i) {
    if (sample_accepted(n, bounds, derive_seed(seed, static_cast<std::uint64_t>(i)))) {
      ++accepted;
    }
  }
  return finish(n, extinction_dB, samples, accepted);
}

CoverageEstimate estimate_coverage_serial(int n, double extinction_dB, long samples,
                                          std::uint64_t seed) {
  validate(n, extinction_dB, samples);
  const ReflectivityBounds bounds = reflectivity_bounds(extinction_dB);
  long accepted = 0;
  for (long i = 0; i < samples; ++i) {
    if (sample_accepted(n, bounds, derive_seed(seed, static_cast<std::uint64_t>(i)))) {
      ++accepted;
    }
  }
  return finish(n, extinction_dB, samples, accepted);
}

std::vector<CoverageEstimate> coverage_curve(const std::vector<int>& n_values,
                                             const std::vector<double>& extinction_dBs,
                                             long samples, std::uint64_t seed) {
  if (n_values.empty() || extinction_dBs.empty()) {
    throw std::invalid_argument("coverage_curve: empty ranges");
  }
  std::vector<CoverageEstimate> table;
  table.reserve(n_values.size() * extinction_dBs.size());
  for (int n : n_values) {
    for (double dB : extinction_dBs) {
      table.push_back(estimate_coverage(n, dB, samples, seed));
    }
  }
  return table;
}

}  // namespace multiport
