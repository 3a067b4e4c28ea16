#include "multiport/stabilize.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>

using namespace multiport;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("required_detectors follows 2(n-1)") {
  CHECK(required_detectors(3) == 4);
  CHECK(required_detectors(4) == 6);
  CHECK(required_detectors(2) == 2);
  for (int n = 2; n < 12; ++n) {
    CHECK(required_detectors(n + 1) - required_detectors(n) == 2);
  }
  CHECK_THROWS_AS(required_detectors(1), std::invalid_argument);
}

TEST_CASE("interference_signal endpoints") {
  CHECK(interference_signal(0.0, 1.0, 1.0) == doctest::Approx(1.0));
  CHECK(interference_signal(kPi, 1.0, 1.0) == doctest::Approx(0.0));
  CHECK(interference_signal(2.34, 1.0, 0.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(interference_signal(0.0, 1.0, 1.5), std::invalid_argument);
}

TEST_CASE("run_lock with zero drift settles to machine noise") {
  StabilizerConfig cfg;
  cfg.drift.sigma = 0.0;
  cfg.duration = 2.0;
  const LockTelemetry tel = run_lock(cfg, 1);
  REQUIRE(tel.loops == 4);
  for (double rms : tel.residual_rms) {
    CHECK(rms <= 1e-9);
  }
}

TEST_CASE("run_lock telemetry is deterministic per seed") {
  StabilizerConfig cfg;
  cfg.duration = 1.0;
  const LockTelemetry a = run_lock(cfg, 77);
  const LockTelemetry b = run_lock(cfg, 77);
  CHECK(a.phase_error == b.phase_error);
  CHECK(a.actuation == b.actuation);
  const LockTelemetry c = run_lock(cfg, 78);
  CHECK(a.phase_error != c.phase_error);
}

TEST_CASE("open loop error variance grows like a random walk") {
  StabilizerConfig cfg;
  cfg.gains = PidGains{0.0, 0.0, 0.0};
  cfg.duration = 2.0;
  cfg.drift.sigma = 0.5;
  const int runs = 100;

  double sum_sq = 0.0;
  long count = 0;
  double elapsed = cfg.duration;
  for (int run = 0; run < runs; ++run) {
    const LockTelemetry tel = run_lock(cfg, derive_seed(515, run));
    elapsed = tel.dt * static_cast<double>(tel.time.size());  // one increment per step
    for (int loop = 0; loop < tel.loops; ++loop) {
      const double final_error = tel.phase_error[loop].back();
      sum_sq += final_error * final_error;
      ++count;
    }
  }
  const double variance = sum_sq / static_cast<double>(count);
  const double slope = variance / elapsed;
  const double expected = cfg.drift.sigma * cfg.drift.sigma;
  // sample variance of a Gaussian: sd = sigma^2 * sqrt(2/count)
  const double bound = 3.0 * expected * std::sqrt(2.0 / static_cast<double>(count));
  CHECK(std::abs(slope - expected) <= bound);
}

TEST_CASE("closed loop keeps the residual small under default drift") {
  StabilizerConfig cfg;  // sigma 0.5, kp 0.8, ki 5, dt 1 ms
  cfg.duration = 10.0;
  const LockTelemetry tel = run_lock(cfg, 2024);
  for (double rms : tel.residual_rms) {
    CHECK(rms <= 0.05);
    CHECK(rms > 0.0);
  }
}

TEST_CASE("residual is bounded, not growing with run length") {
  StabilizerConfig short_cfg;
  short_cfg.duration = 10.0;
  StabilizerConfig long_cfg;
  long_cfg.duration = 40.0;
  const LockTelemetry a = run_lock(short_cfg, 5);
  const LockTelemetry b = run_lock(long_cfg, 5);
  for (int loop = 0; loop < a.loops; ++loop) {
    CHECK(b.residual_rms[loop] <= a.residual_rms[loop] * 1.2 + 0.01);
    CHECK(b.residual_rms[loop] >= a.residual_rms[loop] * 0.8 - 0.01);
  }
}

TEST_CASE("unstable gains diverge without throwing") {
  StabilizerConfig cfg;
  cfg.gains = PidGains{3.0, 0.0, 0.0};  // |1-kp| > 1
  cfg.duration = 2.0;
  const LockTelemetry tel = run_lock(cfg, 3);
  double worst = 0.0;
  for (double rms : tel.residual_rms) worst = std::max(worst, rms);
  CHECK(worst > 0.3);
}

TEST_CASE("stabilizer config validation") {
  StabilizerConfig cfg;
  cfg.dt = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = StabilizerConfig{};
  cfg.duration = 1e-4;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = StabilizerConfig{};
  cfg.wavelength_2_nm = cfg.wavelength_1_nm;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = StabilizerConfig{};
  cfg.setpoints = {0.1, 0.2};  // needs 4 for n=3
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("lock quality maps to fidelity") {
  const SourceConfig cfg = SourceConfig::equal_superposition(3);
  CHECK(lock_quality_to_fidelity(0.0, cfg, 10, 1) == 1.0);

  // Fully randomized phases: the diagonal overlap survives, E[F] -> 1/3.
  const double scrambled = lock_quality_to_fidelity(1e3, cfg, 40000, 2);
  CHECK(scrambled == doctest::Approx(1.0 / 3.0).epsilon(0.02));

  // Decreasing in RMS, quadratic near zero.
  const double f1 = lock_quality_to_fidelity(0.01, cfg, 20000, 3);
  const double f2 = lock_quality_to_fidelity(0.02, cfg, 20000, 3);
  const double f5 = lock_quality_to_fidelity(0.05, cfg, 20000, 3);
  CHECK(f1 > f2);
  CHECK(f2 > f5);
  const double c1 = (1.0 - f1) / (0.01 * 0.01);
  const double c2 = (1.0 - f2) / (0.02 * 0.02);
  const double c5 = (1.0 - f5) / (0.05 * 0.05);
  CHECK(c1 > 0.0);
  CHECK(c1 == doctest::Approx(c2).epsilon(0.05));
  CHECK(c2 == doctest::Approx(c5).epsilon(0.05));
}
