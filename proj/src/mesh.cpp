#include "multiport/mesh.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace multiport {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kNullTol = 1e-14;

Eigen::Matrix2cd coupler_matrix(double eta) {
  if (!(eta > 0.0 && eta < 1.0)) {
    throw std::invalid_argument("coupler cross-coupling must lie in (0,1)");
  }
  const double t = std::sqrt(1.0 - eta);
  const double r = std::sqrt(eta);
  Eigen::Matrix2cd c;
  c << t, r, r, -t;
  return c;
}

// Ideal 2×2 MZI in closed form; equals coupler(1/2)·phase(theta)·coupler(1/2)·phase(phi).
Eigen::Matrix2cd ideal_mzi(double theta, double phi) {
  const Complex half = std::polar(1.0, theta / 2.0);
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  const Complex ext = std::polar(1.0, phi);
  Eigen::Matrix2cd m;
  m << half * ext * c, half * Complex(0.0, s),
       half * ext * Complex(0.0, s), half * c;
  return m;
}

// Left-multiply V by the embedded 2×2 block on rows (pair, pair+1).
void apply_left(Matrix& v, int pair, const Eigen::Matrix2cd& block) {
  const Eigen::Index n = v.cols();
  for (Eigen::Index c = 0; c < n; ++c) {
    const Complex top = v(pair, c);
    const Complex bot = v(pair + 1, c);
    v(pair, c) = block(0, 0) * top + block(0, 1) * bot;
    v(pair + 1, c) = block(1, 0) * top + block(1, 1) * bot;
  }
}

// Right-multiply V by the embedded 2×2 block on columns (pair, pair+1).
void apply_right(Matrix& v, int pair, const Eigen::Matrix2cd& block) {
  const Eigen::Index n = v.rows();
  for (Eigen::Index r = 0; r < n; ++r) {
    const Complex left = v(r, pair);
    const Complex right = v(r, pair + 1);
    v(r, pair) = left * block(0, 0) + right * block(1, 0);
    v(r, pair + 1) = left * block(0, 1) + right * block(1, 1);
  }
}

double clip(double x, const ReflectivityBounds& b) {
  return std::min(std::max(x, b.lo), b.hi);
}

}  // namespace

ReflectivityBounds reflectivity_bounds(double extinction_dB) {
  if (std::isinf(extinction_dB) && extinction_dB > 0.0) {
    return {0.0, 1.0};
  }
  if (!(extinction_dB > 0.0) || std::isnan(extinction_dB)) {
    throw std::invalid_argument("reflectivity_bounds: extinction must be positive or infinite");
  }
  const double eps = 1.0 / (1.0 + std::pow(10.0, extinction_dB / 10.0));
  return {eps, 1.0 - eps};
}

double extinction_dB_to_visibility(double extinction_dB) {
  const ReflectivityBounds b = reflectivity_bounds(extinction_dB);
  return (b.hi - b.lo) / (b.hi + b.lo);
}

double visibility_to_extinction_dB(double visibility) {
  if (!(visibility > 0.0 && visibility < 1.0)) {
    throw std::invalid_argument("visibility_to_extinction_dB: visibility must lie in (0,1)");
  }
  return 10.0 * std::log10((1.0 + visibility) / (1.0 - visibility));
}

Imperfections Imperfections::ideal() { return Imperfections(); }

Imperfections Imperfections::extinction(double dB) {
  reflectivity_bounds(dB);  // validate
  Imperfections imp;
  imp.ideal_ = std::isinf(dB);
  imp.extinction_dB_ = dB;
  return imp;
}

Imperfections Imperfections::per_unit_extinction(std::vector<double> dBs) {
  if (dBs.empty()) {
    throw std::invalid_argument("Imperfections::per_unit_extinction: empty list");
  }
  for (double dB : dBs) reflectivity_bounds(dB);  // validate
  Imperfections imp;
  imp.ideal_ = false;
  imp.per_unit_dB_ = std::move(dBs);
  return imp;
}

Imperfections Imperfections::couplers(std::vector<CouplerPair> per_unit) {
  if (per_unit.empty()) {
    throw std::invalid_argument("Imperfections::couplers: empty coupler list");
  }
  for (const auto& cp : per_unit) {
    if (!(cp.eta1 > 0.0 && cp.eta1 < 1.0 && cp.eta2 > 0.0 && cp.eta2 < 1.0)) {
      throw std::invalid_argument("Imperfections::couplers: eta must lie in (0,1)");
    }
  }
  Imperfections imp;
  imp.ideal_ = false;
  imp.couplers_ = std::move(per_unit);
  return imp;
}

ReflectivityBounds Imperfections::bounds_for_unit(std::size_t index) const {
  if (!couplers_.empty()) {
    if (index >= couplers_.size()) {
      throw std::invalid_argument("Imperfections: unit index beyond coupler list");
    }
    return coupler_reflectivity_bounds(couplers_[index]);
  }
  if (!per_unit_dB_.empty()) {
    if (index >= per_unit_dB_.size()) {
      throw std::invalid_argument("Imperfections: unit index beyond extinction list");
    }
    return reflectivity_bounds(per_unit_dB_[index]);
  }
  return reflectivity_bounds(extinction_dB_);
}

Eigen::Matrix2cd mzi_unitary(const MziSetting& setting, std::optional<CouplerPair> couplers) {
  if (!std::isfinite(setting.theta) || !std::isfinite(setting.phi)) {
    throw std::invalid_argument("mzi_unitary: phases must be finite");
  }
  if (!couplers) {
    return ideal_mzi(setting.theta, setting.phi);
  }
  Eigen::Matrix2cd phase_int = Eigen::Matrix2cd::Identity();
  phase_int(0, 0) = std::polar(1.0, setting.theta);
  Eigen::Matrix2cd phase_ext = Eigen::Matrix2cd::Identity();
  phase_ext(0, 0) = std::polar(1.0, setting.phi);
  return coupler_matrix(couplers->eta2) * phase_int * coupler_matrix(couplers->eta1) * phase_ext;
}

ReflectivityBounds coupler_reflectivity_bounds(const CouplerPair& couplers) {
  // R(theta) = (r2 t1)² + (t2 r1)² − 2 r2 t1 t2 r1 cos(theta)
  const double t1 = std::sqrt(1.0 - couplers.eta1);
  const double r1 = std::sqrt(couplers.eta1);
  const double t2 = std::sqrt(1.0 - couplers.eta2);
  const double r2 = std::sqrt(couplers.eta2);
  const double a = r2 * t1;
  const double b = t2 * r1;
  return {(a - b) * (a - b), (a + b) * (a + b)};
}

MeshSettings compile_unitary(const Unitary& u) {
  const int n = u.dim();
  if (!is_unitary(u.matrix(), kUnitaryTol)) {
    throw std::invalid_argument("compile_unitary: input is not unitary at 1e-10");
  }
  Matrix v = u.matrix();

  MeshSettings settings;
  settings.n = n;
  settings.units.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);

  // Null the sub-diagonal by right-multiplying with inverse units on adjacent
  // column pairs: bottom row of the remaining block first, left to right.
  // Once a row is clear, unitarity clears the matching column as well, so the
  // leading block recurses. Units end up stored in light-path order.
  for (int i = n - 1; i >= 1; --i) {
    for (int j = 0; j < i; ++j) {
      const Complex a = v(i, j);
      const Complex b = v(i, j + 1);
      double theta = 0.0;
      double phi = 0.0;
      if (std::abs(a) < kNullTol) {
        theta = 0.0;  // bar state tie-break
        phi = 0.0;
      } else if (std::abs(b) < kNullTol) {
        theta = kPi;
        phi = 0.0;
      } else {
        theta = 2.0 * std::atan2(std::abs(a), std::abs(b));
        phi = wrap_2pi(std::arg(a) - std::arg(b) - kPi / 2.0);
      }
      const MziSetting setting{theta, phi};
      apply_right(v, j, ideal_mzi(theta, phi).adjoint());
      v(i, j) = Complex(0.0, 0.0);  // nulled by construction
      settings.units.push_back(MeshUnit{j, setting});
    }
  }

  settings.output_phases.resize(n);
  for (int k = 0; k < n; ++k) {
    settings.output_phases[k] = wrap_2pi(std::arg(v(k, k)));
  }
  return settings;
}

Unitary forward_unitary(const MeshSettings& settings, const Imperfections& imperfections) {
  const int n = settings.n;
  if (n < 1) {
    throw std::invalid_argument("forward_unitary: invalid mode count");
  }
  if (settings.units.size() != static_cast<std::size_t>(n) * (n - 1) / 2) {
    throw std::invalid_argument("forward_unitary: unit count must equal n(n-1)/2");
  }
  if (settings.output_phases.size() != static_cast<std::size_t>(n)) {
    throw std::invalid_argument("forward_unitary: need n output phases");
  }
  if (imperfections.has_couplers() &&
      imperfections.coupler_pairs().size() != settings.units.size()) {
    throw std::invalid_argument("forward_unitary: need one coupler pair per unit");
  }

  Matrix m = Matrix::Identity(n, n);
  for (std::size_t k = 0; k < settings.units.size(); ++k) {
    const MeshUnit& unit = settings.units[k];
    if (unit.pair < 0 || unit.pair + 1 >= n) {
      throw std::invalid_argument("forward_unitary: unit pair out of range");
    }
    Eigen::Matrix2cd block;
    if (imperfections.has_couplers()) {
      block = mzi_unitary(unit.setting, imperfections.coupler_pairs().at(k));
    } else if (imperfections.is_ideal()) {
      block = ideal_mzi(unit.setting.theta, unit.setting.phi);
    } else {
      const ReflectivityBounds b = imperfections.bounds_for_unit(k);
      const double s = std::sin(unit.setting.theta / 2.0);
      const double r = s * s;
      const double clipped = clip(r, b);
      // Keep theta untouched when the bounds are inactive; asin would fold
      // theta > pi onto the other branch of equal reflectivity.
      const double theta_eff =
          clipped == r ? unit.setting.theta : 2.0 * std::asin(std::sqrt(clipped));
      block = ideal_mzi(theta_eff, unit.setting.phi);
    }
    apply_left(m, unit.pair, block);
  }
  for (int k = 0; k < n; ++k) {
    m.row(k) *= std::polar(1.0, settings.output_phases[k]);
  }
  return Unitary(std::move(m));
}

RealizableResult nearest_realizable(const Unitary& u, const Imperfections& imperfections) {
  MeshSettings settings = compile_unitary(u);
  for (std::size_t k = 0; k < settings.units.size(); ++k) {
    const ReflectivityBounds b = imperfections.bounds_for_unit(k);
    const double theta = settings.units[k].setting.theta;
    const double r = std::sin(theta / 2.0) * std::sin(theta / 2.0);
    const double clipped = clip(r, b);
    if (clipped != r) {
      settings.units[k].setting.theta = 2.0 * std::asin(std::sqrt(clipped));
    }
  }
  Unitary realized = forward_unitary(settings, Imperfections::ideal());
  const double distance = distance_up_to_global_phase(u, realized);
  return RealizableResult{std::move(settings), std::move(realized), distance};
}

}  // namespace multiport
