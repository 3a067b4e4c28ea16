#include "multiport/stabilize.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace multiport {

namespace {
constexpr double kPi = std::numbers::pi;

double clamp_unit(double x) { return std::min(1.0, std::max(-1.0, x)); }

// Invert the two-fringe readout. Candidates from the first wavelength are
// x and 2π−x; the second wavelength breaks the tie.
double estimate_phase(double s1, double s2, double scale, double visibility) {
  const double c1 = clamp_unit((2.0 * s1 - 1.0) / visibility);
  const double c2 = (2.0 * s2 - 1.0) / visibility;
  const double cand_a = std::acos(c1);
  const double cand_b = 2.0 * kPi - cand_a;
  const double miss_a = std::abs(std::cos(scale * cand_a) - c2);
  const double miss_b = std::abs(std::cos(scale * cand_b) - c2);
  return miss_a <= miss_b ? cand_a : cand_b;
}
}  // namespace

void StabilizerConfig::validate() const {
  if (n < 2) {
    throw std::invalid_argument("StabilizerConfig: n must be >= 2");
  }
  if (!(dt > 0.0)) {
    throw std::invalid_argument("StabilizerConfig: dt must be positive");
  }
  if (duration < dt) {
    throw std::invalid_argument("StabilizerConfig: duration must be >= dt");
  }
  if (wavelength_1_nm == wavelength_2_nm || wavelength_1_nm <= 0.0 || wavelength_2_nm <= 0.0) {
    throw std::invalid_argument("StabilizerConfig: need two distinct positive wavelengths");
  }
  if (!(visibility > 0.0 && visibility <= 1.0)) {
    throw std::invalid_argument("StabilizerConfig: visibility must lie in (0,1]");
  }
  if (drift.sigma < 0.0) {
    throw std::invalid_argument("StabilizerConfig: drift sigma must be >= 0");
  }
  const std::size_t loops = static_cast<std::size_t>(2 * (n - 1));
  if (!setpoints.empty() && setpoints.size() != loops) {
    throw std::invalid_argument("StabilizerConfig: need one setpoint per loop");
  }
}

int required_detectors(int n) {
  if (n < 2) {
    throw std::invalid_argument("required_detectors: n must be >= 2");
  }
  return 2 * (n - 1);
}

double interference_signal(double relative_phase, double wavelength_scale,
                           double visibility) {
  if (visibility < 0.0 || visibility > 1.0) {
    throw std::invalid_argument("interference_signal: visibility must lie in [0,1]");
  }
  return 0.5 * (1.0 + visibility * std::cos(wavelength_scale * relative_phase));
}

LockTelemetry run_lock(const StabilizerConfig& config, std::uint64_t seed) {
  config.validate();
  const int loops = 2 * (config.n - 1);
  const long steps = std::max(1L, std::lround(config.duration / config.dt));
  const double scale = config.wavelength_1_nm / config.wavelength_2_nm;

  std::vector<double> setpoints = config.setpoints;
  if (setpoints.empty()) {
    setpoints.assign(loops, kPi / 2.0);  // mid-fringe
  }

  LockTelemetry tel;
  tel.n = config.n;
  tel.loops = loops;
  tel.dt = config.dt;
  tel.time.resize(steps);
  tel.phase_error.assign(loops, std::vector<double>(steps, 0.0));
  tel.actuation.assign(loops, std::vector<double>(steps, 0.0));
  tel.signal_w1.assign(loops, std::vector<double>(steps, 0.0));
  tel.signal_w2.assign(loops, std::vector<double>(steps, 0.0));
  tel.residual_rms.resize(loops);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, config.drift.sigma * std::sqrt(config.dt));

  std::vector<double> phase(setpoints);  // start locked; acquisition is out of scope
  std::vector<double> integral(loops, 0.0);
  std::vector<double> prev_error(loops, 0.0);

  for (long step = 0; step < steps; ++step) {
    tel.time[step] = step * config.dt;
    for (int loop = 0; loop < loops; ++loop) {
      if (config.drift.sigma > 0.0) {
        phase[loop] += gauss(rng);
      }
      const double s1 = interference_signal(phase[loop], 1.0, config.visibility);
      const double s2 = interference_signal(phase[loop], scale, config.visibility);
      const double estimate = estimate_phase(s1, s2, scale, config.visibility);
      const double error = wrap_pm_pi(estimate - setpoints[loop]);

      integral[loop] += error * config.dt;
      const double derivative = step > 0 ? (error - prev_error[loop]) / config.dt : 0.0;
      const double u = -(config.gains.kp * error + config.gains.ki * integral[loop] +
                         config.gains.kd * derivative);
      prev_error[loop] = error;
      phase[loop] += u;

      tel.phase_error[loop][step] = phase[loop] - u - setpoints[loop];  // pre-actuation error
      tel.actuation[loop][step] = u;
      tel.signal_w1[loop][step] = s1;
      tel.signal_w2[loop][step] = s2;
    }
  }

  const long tail_start = steps / 2;
  for (int loop = 0; loop < loops; ++loop) {
    double ss = 0.0;
    for (long step = tail_start; step < steps; ++step) {
      const double e = tel.phase_error[loop][step];
      ss += e * e;
    }
    tel.residual_rms[loop] = std::sqrt(ss / static_cast<double>(steps - tail_start));
  }
  return tel;
}

double lock_quality_to_fidelity(double residual_rms, const SourceConfig& config,
                                long samples, std::uint64_t seed) {
  if (residual_rms < 0.0) {
    throw std::invalid_argument("lock_quality_to_fidelity: rms must be >= 0");
  }
  if (samples < 1) {
    throw std::invalid_argument("lock_quality_to_fidelity: samples must be >= 1");
  }
  config.validate();
  if (residual_rms == 0.0) return 1.0;

  const StateVector ideal = entangled_state(config);
  double total = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : total)
  for (long i = 0; i < samples; ++i) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    std::normal_distribution<double> gauss(0.0, residual_rms);
    SourceConfig jittered = config;
    // Mode 0 is the stabilization reference; the 2(n−1) stabilized fibers
    // each carry independent residual jitter.
    for (int k = 1; k < config.n; ++k) {
      jittered.phases_a[k] += gauss(rng);
      jittered.phases_b[k] += gauss(rng);
    }
    total += fidelity(ideal, entangled_state(jittered));
  }
  return total / static_cast<double>(samples);
}

}  // namespace multiport
