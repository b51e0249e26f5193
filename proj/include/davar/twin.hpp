#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "davar/assim.hpp"
#include "davar/rng.hpp"
#include "davar/solvers.hpp"

namespace davar {

/// Placement of observation times within the window of N steps.
///   Nobs1: {N}   Nobs2: {N/2, N}   Nobs3: {N/4, N/2, 3N/4, N}
///   Nobs4: {2, 4, ..., N}
enum class ObsLayout { Nobs1, Nobs2, Nobs3, Nobs4 };

/// Full description of one twin experiment: model, window, noise levels,
/// observation layout and the ensemble/solver parameters.
struct TwinConfig {
  ModelSpec spec;
  double t_a = 1.0;      // window length in model time units
  double var_b = 25.0;   // background error variance sigma_b^2
  double var_o = 1.0;    // observation error variance sigma_o^2
  ObsLayout layout = ObsLayout::Nobs1;
  std::vector<int> obs_components;  // empty = model default (L63: {0,2}; L96: first n/2)
  int n_realizations = 100;
  std::uint64_t base_seed = 0;
  int workers = 0;               // OpenMP threads for run_ensemble; 0 = runtime default
  bool fresh_reference = false;  // draw a new reference state per realization
  SolverOptions solver;          // shared across the three methods

  int window_steps() const;  // t_a / dt, validated to be a positive integer
  std::vector<int> resolved_components() const;
  void validate() const;
};

/// One random problem instance: reference, noisy background, noisy
/// observations, and the seeds that produced them.
struct Realization {
  int index = 0;
  std::uint64_t seed_b = 0;
  std::uint64_t seed_o = 0;
  StateVector x_ref;
  StateVector x_b;
  ObservationSet obs;
};

/// Spin-up: components of the initial vector drawn from Uniform(0,1), then
/// 1000 steps of the model's own scheme to land on the attractor.
StateVector make_reference(const ModelSpec& spec, std::uint64_t seed);

/// x_ref + sigma_b * z with z standard normal: the same seed produces the
/// same z for every variance.
StateVector make_background(const StateVector& x_ref, double var_b, std::uint64_t seed);

/// Observation steps implied by a layout; throws ConfigError when the
/// window length is incompatible (e.g. Nobs3 with N not divisible by 4).
std::vector<int> layout_steps(ObsLayout layout, int n_steps);

const char* layout_name(ObsLayout layout);

/// Noisy observations of the reference trajectory at the layout's steps.
ObservationSet make_observations(const Trajectory& reference, ObsLayout layout,
                                 const std::vector<int>& components, double var_o,
                                 std::uint64_t seed);

Realization make_realization(const TwinConfig& cfg, int index);
AssimilationProblem make_problem(const TwinConfig& cfg, const Realization& realization);

/// One (realization, method) outcome; the row unit of the results CSV.
struct EnsembleResultRow {
  int seed_index = 0;
  Method method = Method::GN;
  int l = 0;
  int kJ = 0;
  double cost_final = 0.0;
  double cost_best = 0.0;
  double grad_norm_final = 0.0;
  double step_norm_final = 0.0;
  double rmse = 0.0;  // analysis RMSE of the best-within-budget iterate
  StopReason stop_reason = StopReason::Budget;
  double cost_initial = 0.0;
};

using ResultTable = std::vector<EnsembleResultRow>;

/// Called with every finished solver trace. May run concurrently from the
/// ensemble workers, so implementations must be thread-safe.
using TraceObserver =
    std::function<void(const Realization&, const SolverOptions&, const SolverTrace&)>;

/// Runs GN, LS and REG on one realization from the identical start v0 = 0.
std::vector<EnsembleResultRow> run_realization(const TwinConfig& cfg,
                                               const Realization& realization,
                                               const TraceObserver& observer = {});

/// Serial reference runner: one realization after another.
ResultTable run_ensemble_serial(const TwinConfig& cfg, const TraceObserver& observer = {});

/// OpenMP runner: realizations are independent work units and the assembled
/// table is identical to the serial one for any worker count.
ResultTable run_ensemble(const TwinConfig& cfg, const TraceObserver& observer = {});

}  // namespace davar
