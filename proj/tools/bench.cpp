// Timing harness for the data-parallel kernels: OpenMP versions against the
// serial references, with a result-equality check on every row.

#include "multiport/coverage.hpp"
#include "multiport/experiment.hpp"
#include "multiport/linalg.hpp"
#include "multiport/source.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>

namespace {

double time_ms(const std::function<void()>& fn) {
  const auto start = std::chrono::steady_clock::now();
  fn();
  const auto stop = std::chrono::steady_clock::now();
  return std::chrono::duration<double, std::milli>(stop - start).count();
}

void row(const char* name, double serial_ms, double parallel_ms, bool equal) {
  std::printf("%-28s %10.1f ms %10.1f ms   x%.2f   %s\n", name, serial_ms, parallel_ms,
              serial_ms / parallel_ms, equal ? "results equal" : "RESULTS DIFFER");
}

}  // namespace

int main() {
  using namespace multiport;
  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-28s %13s %13s %7s\n", "kernel", "serial", "openmp", "speedup");

  {
    CoverageEstimate ser{}, par{};
    const double t_ser =
        time_ms([&] { ser = estimate_coverage_serial(10, 30.0, 20000, 7); });
    const double t_par = time_ms([&] { par = estimate_coverage(10, 30.0, 20000, 7); });
    row("coverage n=10, 2e4 samples", t_ser, t_par, ser.fraction == par.fraction);
  }

  {
    SourceConfig cfg = SourceConfig::equal_superposition(3);
    cfg.singles_a = 5e4;
    cfg.singles_b = 5e4;
    const Unitary f = dft_matrix(3);
    GridSpec grid;
    grid.nx = 180;
    grid.ny = 150;
    ScanOptions options;
    options.all_pairs = true;
    CorrelationMap ser, par;
    const double t_ser =
        time_ms([&] { ser = scan_correlation_map_serial(cfg, f, f, grid, options, 3); });
    const double t_par =
        time_ms([&] { par = scan_correlation_map(cfg, f, f, grid, options, 3); });
    row("scan 180x150, all pairs", t_ser, t_par,
        ser.expected == par.expected && ser.sampled == par.sampled);
  }

  return 0;
}
