// Compares the serial reference ensemble runner against the OpenMP runner
// on a fixed L96 configuration and verifies that every thread count
// produces the identical result table.

#include <chrono>
#include <iostream>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "davar/csv.hpp"
#include "davar/twin.hpp"

namespace {

double time_seconds(const std::function<davar::ResultTable()>& work, davar::ResultTable& out) {
  const auto started = std::chrono::steady_clock::now();
  out = work();
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
  return elapsed.count();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ensemble runner benchmark: serial reference vs OpenMP"};
  int n_r = 24;
  int tau_e = 100;
  int max_threads =
#ifdef _OPENMP
      omp_get_max_threads();
#else
      1;
#endif
  app.add_option("--n-r", n_r, "realizations");
  app.add_option("--tau-e", tau_e, "evaluation budget per solver");
  app.add_option("--threads", max_threads, "highest thread count to benchmark");
  CLI11_PARSE(app, argc, argv);

  davar::TwinConfig cfg;
  cfg.spec = davar::ModelSpec::lorenz96();
  cfg.t_a = 1.0;
  cfg.var_b = 6.25;
  cfg.var_o = 0.25;
  cfg.layout = davar::ObsLayout::Nobs4;
  cfg.n_realizations = n_r;
  cfg.base_seed = 2026;
  cfg.solver.tau_e = tau_e;

  davar::ResultTable reference;
  const double serial_time = time_seconds([&] { return davar::run_ensemble_serial(cfg); },
                                          reference);
  std::cout << "serial reference: " << serial_time << " s (" << reference.size() << " rows)\n";

  const std::string reference_csv = davar::results_csv_string(reference);
  bool all_match = true;
  for (int threads = 1; threads <= max_threads; threads *= 2) {
    cfg.workers = threads;
    davar::ResultTable table;
    const double parallel_time = time_seconds([&] { return davar::run_ensemble(cfg); }, table);
    const bool match = davar::results_csv_string(table) == reference_csv;
    all_match = all_match && match;
    std::cout << "openmp x" << threads << ":       " << parallel_time << " s  speedup "
              << serial_time / parallel_time << "  results "
              << (match ? "identical" : "DIFFER") << "\n";
  }
  if (!all_match) {
    std::cerr << "parallel results diverged from the serial reference\n";
    return 1;
  }
  return 0;
}
