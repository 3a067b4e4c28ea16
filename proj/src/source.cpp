#include "multiport/source.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace multiport {

SourceConfig SourceConfig::equal_superposition(int n) {
  if (n < 1) {
    throw std::invalid_argument("SourceConfig: n must be >= 1");
  }
  SourceConfig cfg;
  cfg.n = n;
  cfg.amplitudes.assign(n, 1.0 / std::sqrt(static_cast<double>(n)));
  cfg.phases_a.assign(n, 0.0);
  cfg.phases_b.assign(n, 0.0);
  return cfg;
}

void SourceConfig::validate() const {
  if (n < 1) {
    throw std::invalid_argument("SourceConfig: n must be >= 1");
  }
  if (amplitudes.size() != static_cast<std::size_t>(n) ||
      phases_a.size() != static_cast<std::size_t>(n) ||
      phases_b.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("SourceConfig: amplitude/phase vectors must have length n");
  }
  double norm = 0.0;
  for (double a : amplitudes) {
    if (a < 0.0) {
      throw std::invalid_argument("SourceConfig: amplitudes must be non-negative");
    }
    norm += a * a;
  }
  if (std::abs(norm - 1.0) > 1e-10) {
    throw std::invalid_argument("SourceConfig: amplitudes must satisfy sum A_k^2 = 1");
  }
  if (pair_rate < 0.0 || singles_a < 0.0 || singles_b < 0.0 || window < 0.0 ||
      integration < 0.0) {
    throw std::invalid_argument("SourceConfig: rates, window and integration must be >= 0");
  }
}

StateVector entangled_state(const SourceConfig& config) {
  config.validate();
  const int n = config.n;
  CVector amps = CVector::Zero(static_cast<Eigen::Index>(n) * n);
  for (int k = 0; k < n; ++k) {
    amps(k * n + k) =
        std::polar(config.amplitudes[k], config.phases_a[k] - config.phases_b[k]);
  }
  return StateVector(n, n, std::move(amps));
}

std::vector<double> apply_drift(const std::vector<double>& phases, double dt,
                                const DriftModel& model, std::uint64_t seed) {
  if (dt < 0.0) {
    throw std::invalid_argument("apply_drift: dt must be >= 0");
  }
  if (model.sigma < 0.0) {
    throw std::invalid_argument("apply_drift: sigma must be >= 0");
  }
  std::vector<double> out(phases.size());
  if (model.sigma == 0.0 || dt == 0.0) {
    for (std::size_t i = 0; i < phases.size(); ++i) out[i] = wrap_2pi(phases[i]);
    return out;
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, model.sigma * std::sqrt(dt));
  for (std::size_t i = 0; i < phases.size(); ++i) {
    out[i] = wrap_2pi(phases[i] + gauss(rng));
  }
  return out;
}

double accidental_rate(double singles_a, double singles_b, double window) {
  if (singles_a < 0.0 || singles_b < 0.0 || window < 0.0) {
    throw std::invalid_argument("accidental_rate: inputs must be >= 0");
  }
  return singles_a * singles_b * window;
}

}  // namespace multiport
