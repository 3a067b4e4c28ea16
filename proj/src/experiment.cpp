#include "multiport/experiment.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>
#include <stdexcept>

namespace multiport {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDegToRad = kPi / 180.0;

// Outcome probabilities for the diagonal state Σ A_k e^{iδ_k}|kk⟩:
// amplitude matrix U_A · diag(A_k e^{iδ_k}) · U_Bᵀ.
Eigen::MatrixXd diagonal_state_probs(const SourceConfig& config, const Matrix& u_a,
                                     const Matrix& u_b, const std::vector<double>& delta) {
  const int n = config.n;
  CVector diag(n);
  for (int k = 0; k < n; ++k) {
    diag(k) = std::polar(config.amplitudes[k], delta[k]);
  }
  const Matrix amp = u_a * diag.asDiagonal() * u_b.transpose();
  return amp.cwiseAbs2();
}

std::vector<double> scan_deltas(const SourceConfig& config, const GridSpec& grid,
                                double phi_x_rad, double phi_y_rad) {
  std::vector<double> delta(config.n, 0.0);
  delta[1] = phi_x_rad + grid.offset_x_deg * kDegToRad;
  delta[2] = phi_y_rad + grid.offset_y_deg * kDegToRad;
  for (int k = 3; k < config.n; ++k) {
    delta[k] = config.phases_a[k] - config.phases_b[k];
  }
  return delta;
}

std::vector<PairLabel> tracked_pairs(int n, bool all_pairs) {
  std::vector<PairLabel> pairs;
  if (all_pairs) {
    pairs.reserve(static_cast<std::size_t>(n) * n);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) pairs.push_back({a, b});
    }
  } else {
    pairs.reserve(n);
    for (int b = 0; b < n; ++b) pairs.push_back({0, b});
  }
  return pairs;
}

CorrelationMap prepare_map(const SourceConfig& config, const GridSpec& grid,
                           const ScanOptions& options, std::uint64_t seed) {
  CorrelationMap map;
  map.phi_x_deg.resize(grid.nx);
  map.phi_y_deg.resize(grid.ny);
  for (int i = 0; i < grid.nx; ++i) map.phi_x_deg[i] = grid.x_deg(i);
  for (int j = 0; j < grid.ny; ++j) map.phi_y_deg[j] = grid.y_deg(j);
  map.pairs = tracked_pairs(config.n, options.all_pairs);
  map.expected.assign(map.points() * map.pairs.size(), 0.0);
  if (options.sampling) {
    map.sampled.assign(map.points() * map.pairs.size(), 0.0);
  }
  map.pair_rate = config.pair_rate;
  map.integration = config.integration;
  map.accidental = accidental_rate(config.singles_a, config.singles_b, config.window);
  map.subtracted = options.subtract_accidentals;
  map.seed = seed;
  return map;
}

// One grid point: expected probabilities and, when requested, Poisson counts.
// Seeded from (master, point index) only, so scheduling cannot change results.
void fill_point(CorrelationMap& map, const SourceConfig& config, const Matrix& u_a,
                const Matrix& u_b, const GridSpec& grid, const ScanOptions& options,
                std::uint64_t master_seed, std::size_t point) {
  const std::size_t ny = map.phi_y_deg.size();
  const int ix = static_cast<int>(point / ny);
  const int iy = static_cast<int>(point % ny);
  const std::vector<double> delta =
      scan_deltas(config, grid, map.phi_x_deg[ix] * kDegToRad, map.phi_y_deg[iy] * kDegToRad);
  const Eigen::MatrixXd probs = diagonal_state_probs(config, u_a, u_b, delta);

  const std::size_t base = point * map.pairs.size();
  for (std::size_t p = 0; p < map.pairs.size(); ++p) {
    map.expected[base + p] = probs(map.pairs[p].a, map.pairs[p].b);
  }
  if (!options.sampling) return;

  std::mt19937_64 rng(derive_seed(master_seed, point));
  const double floor_counts = map.accidental * config.integration;
  for (std::size_t p = 0; p < map.pairs.size(); ++p) {
    const double rate = config.pair_rate * map.expected[base + p] + map.accidental;
    const double mean = rate * config.integration;
    double counts = 0.0;
    if (mean > 0.0) {
      std::poisson_distribution<long long> poisson(mean);
      counts = static_cast<double>(poisson(rng));
    }
    if (options.subtract_accidentals) counts -= floor_counts;
    map.sampled[base + p] = counts;
  }
}

double refine_maximum(const std::function<double(double, double)>& f, double& x, double& y,
                      double step, double min_step) {
  double best = f(x, y);
  while (step > min_step) {
    bool moved = false;
    const double dx[8] = {step, -step, 0.0, 0.0, step, step, -step, -step};
    const double dy[8] = {0.0, 0.0, step, -step, step, -step, step, -step};
    for (int k = 0; k < 8; ++k) {
      const double v = f(x + dx[k], y + dy[k]);
      if (v > best) {
        best = v;
        x += dx[k];
        y += dy[k];
        moved = true;
        break;
      }
    }
    if (!moved) step *= 0.5;
  }
  return best;
}

}  // namespace

void GridSpec::validate() const {
  if (nx < 2 || ny < 2) {
    throw std::invalid_argument("GridSpec: need at least 2 points per axis");
  }
}

double joint_probability(const StateVector& state, const Unitary& u_a, const Unitary& u_b,
                         int a, int b) {
  if (a < 0 || a >= u_a.dim() || b < 0 || b >= u_b.dim()) {
    throw std::invalid_argument("joint_probability: outcome index out of range");
  }
  return outcome_probabilities(state, u_a, u_b)(a, b);
}

Eigen::MatrixXd outcome_probabilities(const StateVector& state, const Unitary& u_a,
                                      const Unitary& u_b) {
  if (u_a.dim() != state.dim_a() || u_b.dim() != state.dim_b()) {
    throw std::invalid_argument("outcome_probabilities: dimension mismatch");
  }
  const Matrix amp = u_a.matrix() * state.as_matrix() * u_b.matrix().transpose();
  return amp.cwiseAbs2();
}

CorrelationMap scan_correlation_map(const SourceConfig& config, const Unitary& u_a,
                                    const Unitary& u_b, const GridSpec& grid,
                                    const ScanOptions& options, std::uint64_t seed) {
  config.validate();
  grid.validate();
  if (config.n < 3) {
    throw std::invalid_argument("scan_correlation_map: needs n >= 3");
  }
  CorrelationMap map = prepare_map(config, grid, options, seed);
  const Matrix& ma = u_a.matrix();
  const Matrix& mb = u_b.matrix();
  const std::int64_t total = static_cast<std::int64_t>(map.points());
#pragma omp parallel for schedule(static)
  for (std::int64_t point = 0; point < total; ++point) {
    fill_point(map, config, ma, mb, grid, options, seed, static_cast<std::size_t>(point));
  }
  return map;
}

CorrelationMap scan_correlation_map_serial(const SourceConfig& config, const Unitary& u_a,
                                           const Unitary& u_b, const GridSpec& grid,
                                           const ScanOptions& options, std::uint64_t seed) {
  config.validate();
  grid.validate();
  if (config.n < 3) {
    throw std::invalid_argument("scan_correlation_map: needs n >= 3");
  }
  CorrelationMap map = prepare_map(config, grid, options, seed);
  for (std::size_t point = 0; point < map.points(); ++point) {
    fill_point(map, config, u_a.matrix(), u_b.matrix(), grid, options, seed, point);
  }
  return map;
}

double normalization_error(const CorrelationMap& map) {
  double worst = 0.0;
  for (std::size_t point = 0; point < map.points(); ++point) {
    double sum = 0.0;
    for (std::size_t p = 0; p < map.pairs.size(); ++p) {
      sum += map.expected[point * map.pairs.size() + p];
    }
    worst = std::max(worst, std::abs(sum - 1.0));
  }
  return worst;
}

FittedSignal fit_slice(const std::vector<double>& values,
                       const std::vector<double>& grid_y_rad) {
  if (values.size() != grid_y_rad.size()) {
    throw std::invalid_argument("fit_slice: values and grid must have equal length");
  }
  if (values.size() < 4) {
    throw std::invalid_argument("fit_slice: need at least 4 points");
  }
  const std::size_t m = values.size();
  double mean = 0.0, ac = 0.0, as = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mean += values[i];
    ac += values[i] * std::cos(grid_y_rad[i]);
    as += values[i] * std::sin(grid_y_rad[i]);
  }
  mean /= static_cast<double>(m);
  ac *= 2.0 / static_cast<double>(m);
  as *= 2.0 / static_cast<double>(m);

  FittedSignal fit;
  fit.offset = mean;
  fit.amplitude = std::hypot(ac, as);
  fit.phase0 = fit.amplitude > 0.0 ? std::atan2(as, ac) : 0.0;
  double ss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double model = fit.offset + fit.amplitude * std::cos(grid_y_rad[i] - fit.phase0);
    ss += (values[i] - model) * (values[i] - model);
  }
  fit.rms_residual = std::sqrt(ss / static_cast<double>(m));
  return fit;
}

ExtremaReport find_extrema(const SourceConfig& config, const Unitary& u_a,
                           const Unitary& u_b, const CorrelationMap& map) {
  config.validate();
  const int n = config.n;
  if (n < 3) {
    throw std::invalid_argument("find_extrema: needs n >= 3");
  }
  const auto prob = [&](int a, int b, double px, double py) {
    std::vector<double> delta(n, 0.0);
    delta[1] = px;
    delta[2] = py;
    for (int k = 3; k < n; ++k) delta[k] = config.phases_a[k] - config.phases_b[k];
    return diagonal_state_probs(config, u_a.matrix(), u_b.matrix(), delta)(a, b);
  };

  ExtremaReport report;
  const std::size_t ny = map.phi_y_deg.size();
  const double step0 = 2.0 * kPi / static_cast<double>(std::min(map.phi_x_deg.size(), ny));

  for (std::size_t p = 0; p < map.pairs.size(); ++p) {
    std::size_t best_point = 0;
    double best = -1.0;
    for (std::size_t point = 0; point < map.points(); ++point) {
      const double v = map.expected[point * map.pairs.size() + p];
      if (v > best) {
        best = v;
        best_point = point;
      }
    }
    const PairLabel pair = map.pairs[p];
    double x = map.phi_x_deg[best_point / ny] * kDegToRad;
    double y = map.phi_y_deg[best_point % ny] * kDegToRad;
    const double value = refine_maximum(
        [&](double px, double py) { return prob(pair.a, pair.b, px, py); }, x, y, step0, 1e-8);
    report.maxima.push_back(
        Extremum{pair, wrap_2pi(x) / kDegToRad, wrap_2pi(y) / kDegToRad, value});
  }

  for (const Extremum& e : report.maxima) {
    const double dx = wrap_2pi((e.phi_x_deg - report.maxima.front().phi_x_deg) * kDegToRad);
    const double dy = wrap_2pi((e.phi_y_deg - report.maxima.front().phi_y_deg) * kDegToRad);
    report.offsets_deg.push_back({dx / kDegToRad, dy / kDegToRad});
  }

  // Census of the n! possible correlation patterns b = sigma(a): which ones
  // reach a perfect total correlation somewhere in phase space.
  if (n <= 5) {
    std::vector<int> sigma(n);
    for (int i = 0; i < n; ++i) sigma[i] = i;
    do {
      const auto total = [&](double px, double py) {
        double sum = 0.0;
        for (int a = 0; a < n; ++a) sum += prob(a, sigma[a], px, py);
        return sum;
      };
      double bx = 0.0, by = 0.0, best = -1.0;
      for (int i = 0; i < static_cast<int>(map.phi_x_deg.size()); ++i) {
        for (int j = 0; j < static_cast<int>(ny); ++j) {
          const double v = total(map.phi_x_deg[i] * kDegToRad, map.phi_y_deg[j] * kDegToRad);
          if (v > best) {
            best = v;
            bx = map.phi_x_deg[i] * kDegToRad;
            by = map.phi_y_deg[j] * kDegToRad;
          }
        }
      }
      best = refine_maximum(total, bx, by, step0, 1e-8);
      PermutationCorrelation pc;
      pc.sigma = sigma;
      pc.max_total = best;
      pc.perfect = best >= 1.0 - 1e-6;
      if (pc.perfect) ++report.perfect_count;
      report.permutations.push_back(std::move(pc));
    } while (std::next_permutation(sigma.begin(), sigma.end()));
  }
  return report;
}

ShiftCheck detector_shift_equivalence(const SourceConfig& config, const Unitary& u_a,
                                      const Unitary& u_b, int num_points,
                                      std::uint64_t seed, double tol) {
  config.validate();
  const int n = config.n;
  if (n < 3) {
    throw std::invalid_argument("detector_shift_equivalence: needs n >= 3");
  }
  if (distance_up_to_global_phase(u_b.matrix(), dft_matrix(n).matrix()) > 1e-9) {
    return ShiftCheck::kNotApplicable;
  }
  const double unit = 2.0 * kPi / static_cast<double>(n);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 2.0 * kPi);

  for (int trial = 0; trial < num_points; ++trial) {
    const double px = uniform(rng);
    const double py = uniform(rng);
    std::vector<double> delta(n, 0.0);
    delta[1] = px;
    delta[2] = py;
    std::vector<double> shifted(n, 0.0);
    // Shift by one K-unit along the diagonal: δ_k → δ_k + k·2π/n.
    for (int k = 0; k < n; ++k) shifted[k] = delta[k] + k * unit;
    const Eigen::MatrixXd base =
        diagonal_state_probs(config, u_a.matrix(), u_b.matrix(), delta);
    const Eigen::MatrixXd moved =
        diagonal_state_probs(config, u_a.matrix(), u_b.matrix(), shifted);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        if (std::abs(base(a, (b + 1) % n) - moved(a, b)) > tol) {
          return ShiftCheck::kViolated;
        }
      }
    }
  }
  return ShiftCheck::kHolds;
}

double phase_sensitivity(int n, double visibility, int grid_points) {
  if (n < 2) {
    throw std::invalid_argument("phase_sensitivity: n must be >= 2");
  }
  if (visibility < 0.0 || visibility > 1.0) {
    throw std::invalid_argument("phase_sensitivity: visibility must lie in [0,1]");
  }
  if (grid_points < 16) {
    throw std::invalid_argument("phase_sensitivity: grid too coarse");
  }
  const SourceConfig config = SourceConfig::equal_superposition(n);
  const Unitary f = dft_matrix(n);
  const double h = 2.0 * kPi / static_cast<double>(grid_points);

  std::vector<double> pattern(grid_points);
  for (int i = 0; i < grid_points; ++i) {
    std::vector<double> delta(n);
    for (int k = 0; k < n; ++k) delta[k] = k * (i * h);
    const Eigen::MatrixXd probs = diagonal_state_probs(config, f.matrix(), f.matrix(), delta);
    double tracked_sum = 0.0;
    for (int b = 0; b < n; ++b) tracked_sum += probs(0, b);
    const double normalized = probs(0, 0) / tracked_sum;
    const double mean = 1.0 / static_cast<double>(n);
    pattern[i] = mean + visibility * (normalized - mean);
  }

  double max_slope = 0.0;
  for (int i = 0; i < grid_points; ++i) {
    const double next = pattern[(i + 1) % grid_points];
    const double prev = pattern[(i - 1 + grid_points) % grid_points];
    max_slope = std::max(max_slope, std::abs(next - prev) / (2.0 * h));
  }
  return max_slope;
}

double subspace_fidelity(const StateVector& state, int j, int k) {
  const int na = state.dim_a();
  const int nb = state.dim_b();
  if (j == k || j < 0 || k < 0 || j >= na || k >= na || j >= nb || k >= nb) {
    throw std::invalid_argument("subspace_fidelity: invalid mode pair");
  }
  const Complex jj = state.amp(j, j);
  const Complex kk = state.amp(k, k);
  const Complex jk = state.amp(j, k);
  const Complex kj = state.amp(k, j);
  const double norm_sq = std::norm(jj) + std::norm(kk) + std::norm(jk) + std::norm(kj);
  if (norm_sq < 1e-24) {
    throw std::invalid_argument("subspace_fidelity: projection has zero norm");
  }
  // Overlap with (|jj⟩+|kk⟩)/√2 after renormalizing the projection.
  const double overlap_sq = 0.5 * std::norm(jj + kk);
  return overlap_sq / norm_sq;
}

}  // namespace multiport
