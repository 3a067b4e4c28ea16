#include "multiport/mesh.hpp"

#include "doctest.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

using namespace multiport;

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

double cross_power(const Eigen::Matrix2cd& m) { return std::norm(m(1, 0)); }
}  // namespace

TEST_CASE("mzi_unitary bar and cross states") {
  const Eigen::Matrix2cd bar = mzi_unitary({0.0, 0.0});
  CHECK(cross_power(bar) == doctest::Approx(0.0));
  CHECK(is_unitary(bar, 1e-12));

  const Eigen::Matrix2cd cross = mzi_unitary({kPi, 0.0});
  CHECK(cross_power(cross) == doctest::Approx(1.0));
  CHECK(is_unitary(cross, 1e-12));

  // R(theta) = sin^2(theta/2) across the range.
  for (double theta : {0.3, 1.1, 2.0, 2.9, 4.4, 6.0}) {
    const Eigen::Matrix2cd m = mzi_unitary({theta, 0.7});
    CHECK(cross_power(m) == doctest::Approx(std::pow(std::sin(theta / 2.0), 2)).epsilon(1e-12));
    CHECK(is_unitary(m, 1e-12));
  }
}

TEST_CASE("mzi_unitary matches the explicit coupler product") {
  // coupler(1/2) · phase(theta) · coupler(1/2) · phase(phi) equals the closed form.
  const double theta = 1.37, phi = 2.41;
  const Eigen::Matrix2cd closed = mzi_unitary({theta, phi});
  const Eigen::Matrix2cd product = mzi_unitary({theta, phi}, CouplerPair{0.5, 0.5});
  CHECK((closed - product).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("imperfect couplers confine the reachable cross-coupling") {
  const CouplerPair cp{0.45, 0.45};
  double rmin = 2.0, rmax = -1.0;
  for (int i = 0; i < 1440; ++i) {
    const double theta = 2.0 * kPi * i / 1440.0;
    const Eigen::Matrix2cd m = mzi_unitary({theta, 0.0}, cp);
    CHECK(is_unitary(m, 1e-12));
    const double r = cross_power(m);
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
  }
  // Symmetric deviations still reach R = 0; the cross state is lost.
  const double expected_max = 4.0 * 0.45 * 0.55;
  CHECK(rmin == doctest::Approx(0.0).epsilon(1e-9));
  CHECK(rmax == doctest::Approx(expected_max).epsilon(1e-6));
  CHECK(rmax < 1.0);

  const ReflectivityBounds b = coupler_reflectivity_bounds(cp);
  CHECK(b.lo == doctest::Approx(0.0));
  CHECK(b.hi == doctest::Approx(expected_max));
}

TEST_CASE("reflectivity_bounds from the extinction ratio") {
  const ReflectivityBounds ideal = reflectivity_bounds(kInf);
  CHECK(ideal.lo == 0.0);
  CHECK(ideal.hi == 1.0);

  const ReflectivityBounds b30 = reflectivity_bounds(30.0);
  CHECK(b30.lo == doctest::Approx(1.0 / 1001.0).epsilon(1e-12));
  CHECK(b30.lo == doctest::Approx(9.990e-4).epsilon(1e-3));

  // Measured device value: eps = 1/(1 + 10^1.42).
  const ReflectivityBounds b142 = reflectivity_bounds(14.2);
  CHECK(b142.lo == doctest::Approx(1.0 / (1.0 + std::pow(10.0, 1.42))).epsilon(1e-12));
  CHECK(b142.lo == doctest::Approx(0.0366).epsilon(2e-3));

  CHECK_THROWS_AS(reflectivity_bounds(0.0), std::invalid_argument);
  CHECK_THROWS_AS(reflectivity_bounds(-5.0), std::invalid_argument);
}

TEST_CASE("extinction ratio and visibility conversions") {
  // ER = (1+V)/(1-V): V = 0.963 corresponds to about 17.25 dB, not 14.2 dB.
  CHECK(visibility_to_extinction_dB(0.963) == doctest::Approx(17.25).epsilon(1e-3));
  const double er = std::pow(10.0, 1.42);
  CHECK(extinction_dB_to_visibility(14.2) ==
        doctest::Approx((er - 1.0) / (er + 1.0)).epsilon(1e-12));
  for (double dB : {5.0, 14.2, 30.0}) {
    CHECK(visibility_to_extinction_dB(extinction_dB_to_visibility(dB)) ==
          doctest::Approx(dB).epsilon(1e-10));
  }
}

TEST_CASE("compile_unitary of the identity is all-bar with zero phases") {
  const MeshSettings settings = compile_unitary(Unitary::identity(3));
  CHECK(settings.n == 3);
  CHECK(settings.units.size() == 3);
  for (const MeshUnit& unit : settings.units) {
    CHECK(unit.setting.theta == 0.0);
    CHECK(unit.setting.phi == 0.0);
  }
  for (double p : settings.output_phases) {
    CHECK(p == doctest::Approx(0.0));
  }
}

TEST_CASE("compile_unitary unit count and pair layout") {
  for (int n : {2, 3, 5, 8}) {
    const MeshSettings settings = compile_unitary(haar_random_unitary(n, 99 + n));
    CHECK(settings.units.size() == static_cast<std::size_t>(n) * (n - 1) / 2);
    CHECK(settings.output_phases.size() == static_cast<std::size_t>(n));
    for (const MeshUnit& unit : settings.units) {
      CHECK(unit.pair >= 0);
      CHECK(unit.pair + 1 < n);
      CHECK(unit.setting.theta >= 0.0);
      CHECK(unit.setting.theta < 2.0 * kPi);
      CHECK(unit.setting.phi >= 0.0);
      CHECK(unit.setting.phi < 2.0 * kPi);
    }
  }
  CHECK_THROWS_AS(compile_unitary(Unitary(Matrix::Ones(3, 3), 10.0)), std::invalid_argument);
}

TEST_CASE("compile/forward round trip") {
  // dft round trip
  const Unitary f3 = dft_matrix(3);
  CHECK(distance_up_to_global_phase(f3, forward_unitary(compile_unitary(f3))) < 1e-9);

  for (int n : {2, 3, 4, 8, 16}) {
    for (int trial = 0; trial < 20; ++trial) {
      const Unitary u = haar_random_unitary(n, derive_seed(4000 + n, trial));
      const Unitary w = forward_unitary(compile_unitary(u));
      CHECK(distance_up_to_global_phase(u, w) < 1e-9);
    }
  }
}

TEST_CASE("forward_unitary all-bar settings give identity up to output phases") {
  MeshSettings settings;
  settings.n = 4;
  for (int i = 3; i >= 1; --i) {
    for (int j = 0; j < i; ++j) settings.units.push_back(MeshUnit{j, {0.0, 0.0}});
  }
  settings.output_phases = {0.1, 0.2, 0.3, 0.4};
  const Unitary u = forward_unitary(settings);
  for (int k = 0; k < 4; ++k) {
    CHECK(std::abs(u.matrix()(k, k) - std::polar(1.0, settings.output_phases[k])) < 1e-12);
  }
  CHECK(u.matrix().cwiseAbs().sum() == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("forward_unitary stays unitary under any imperfections") {
  const Unitary u = haar_random_unitary(6, 123);
  const MeshSettings settings = compile_unitary(u);
  for (double dB : {3.0, 10.0, 30.0}) {
    const Unitary w = forward_unitary(settings, Imperfections::extinction(dB));
    CHECK(is_unitary(w.matrix(), 1e-10));
  }
  std::vector<CouplerPair> couplers(settings.units.size(), CouplerPair{0.47, 0.52});
  const Unitary wc = forward_unitary(settings, Imperfections::couplers(couplers));
  CHECK(is_unitary(wc.matrix(), 1e-10));

  std::vector<double> per_unit(settings.units.size(), 20.0);
  per_unit.front() = 5.0;
  const Unitary wp = forward_unitary(settings, Imperfections::per_unit_extinction(per_unit));
  CHECK(is_unitary(wp.matrix(), 1e-10));

  couplers.pop_back();
  CHECK_THROWS_AS(forward_unitary(settings, Imperfections::couplers(couplers)),
                  std::invalid_argument);
}

TEST_CASE("forward_unitary of arbitrary settings is unitary") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  MeshSettings settings;
  settings.n = 5;
  for (int i = 4; i >= 1; --i) {
    for (int j = 0; j < i; ++j) {
      settings.units.push_back(MeshUnit{j, {angle(rng), angle(rng)}});
    }
  }
  for (int k = 0; k < 5; ++k) settings.output_phases.push_back(angle(rng));
  CHECK(is_unitary(forward_unitary(settings).matrix(), 1e-10));
  CHECK(is_unitary(forward_unitary(settings, Imperfections::extinction(8.0)).matrix(), 1e-10));

  // Inactive bounds must not disturb the model, even for theta beyond pi.
  const Unitary ideal = forward_unitary(settings);
  const Unitary wide = forward_unitary(settings, Imperfections::extinction(200.0));
  CHECK((ideal.matrix() - wide.matrix()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("per-unit extinction clips only the affected units") {
  const Unitary id = Unitary::identity(3);  // all-bar mesh, R = 0 everywhere
  std::vector<double> dBs{30.0, std::numeric_limits<double>::infinity(),
                          std::numeric_limits<double>::infinity()};
  const RealizableResult r = nearest_realizable(id, Imperfections::per_unit_extinction(dBs));
  const double r0 = std::pow(std::sin(r.settings.units[0].setting.theta / 2.0), 2);
  CHECK(r0 == doctest::Approx(1.0 / 1001.0));
  CHECK(r.settings.units[1].setting.theta == 0.0);
  CHECK(r.settings.units[2].setting.theta == 0.0);
  CHECK(r.distance > 0.0);
}

TEST_CASE("clipping of the compiled dft") {
  // The compiled 10-mode Fourier transform keeps every reflectivity inside
  // [0.15, 0.9], so a 30 dB device realizes it exactly; clipping only starts
  // once the bounds pass those values (below roughly 7.3 dB).
  const Unitary f10 = dft_matrix(10);
  const MeshSettings settings = compile_unitary(f10);
  double rmin = 2.0, rmax = -1.0;
  for (const MeshUnit& unit : settings.units) {
    const double r = std::pow(std::sin(unit.setting.theta / 2.0), 2);
    rmin = std::min(rmin, r);
    rmax = std::max(rmax, r);
  }
  CHECK(rmin > 0.15);
  CHECK(rmax <= 0.9 + 1e-12);

  const RealizableResult at30 = nearest_realizable(f10, Imperfections::extinction(30.0));
  CHECK(at30.distance < 1e-12);

  const RealizableResult at6 = nearest_realizable(f10, Imperfections::extinction(6.0));
  CHECK(at6.distance > 1e-6);
  CHECK(at6.distance < 0.5);
  CHECK(is_unitary(at6.realized.matrix(), 1e-10));
}

TEST_CASE("nearest_realizable clips the bar states of the identity") {
  const RealizableResult r = nearest_realizable(Unitary::identity(3),
                                                Imperfections::extinction(30.0));
  CHECK(r.distance > 0.0);
  for (const MeshUnit& unit : r.settings.units) {
    const double refl = std::pow(std::sin(unit.setting.theta / 2.0), 2);
    CHECK(refl >= 1.0 / 1001.0 - 1e-15);
  }

  const RealizableResult ideal = nearest_realizable(dft_matrix(3), Imperfections::ideal());
  CHECK(ideal.distance == doctest::Approx(0.0));
}

TEST_CASE("nearest_realizable distance shrinks with better extinction") {
  for (int trial = 0; trial < 10; ++trial) {
    const Unitary u = haar_random_unitary(6, derive_seed(777, trial));
    double prev = std::numeric_limits<double>::infinity();
    for (double dB : {3.0, 6.0, 10.0, 20.0, 30.0, 40.0}) {
      const double d = nearest_realizable(u, Imperfections::extinction(dB)).distance;
      CHECK(d <= prev + 1e-12);
      prev = d;
    }
  }
}

TEST_CASE("mesh parameter count matches n^2") {
  for (int n : {2, 3, 6}) {
    const MeshSettings s = compile_unitary(haar_random_unitary(n, n));
    const std::size_t params = 2 * s.units.size() + s.output_phases.size();
    CHECK(params == static_cast<std::size_t>(n) * n);
  }
}
