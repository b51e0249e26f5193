#include "davar/twin.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "davar/profiles.hpp"

namespace davar {

namespace {

constexpr int kSpinUpSteps = 1000;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

EnsembleResultRow row_from_trace(const TwinConfig& cfg, const Realization& realization,
                                 const AssimilationProblem& prob, const SolverTrace& trace) {
  EnsembleResultRow row;
  row.seed_index = realization.index;
  row.method = trace.method;
  row.l = trace.l;
  row.kJ = trace.kJ;
  row.cost_final = trace.final_cost;
  row.cost_best = trace.best_cost;
  row.grad_norm_final = trace.final_grad_norm;
  row.step_norm_final = trace.final_step_norm;
  row.stop_reason = trace.stop_reason;
  row.cost_initial = trace.initial_cost;
  row.rmse = std::isfinite(trace.best_cost)
                 ? analysis_rmse(control_to_state(prob, trace.best_v), realization.x_ref)
                 : kNaN;
  (void)cfg;
  return row;
}

std::vector<EnsembleResultRow> failed_rows(int index) {
  std::vector<EnsembleResultRow> rows;
  for (Method m : {Method::GN, Method::LS, Method::REG}) {
    EnsembleResultRow row;
    row.seed_index = index;
    row.method = m;
    row.cost_final = row.cost_best = row.cost_initial = kNaN;
    row.grad_norm_final = row.step_norm_final = row.rmse = kNaN;
    row.stop_reason = StopReason::NonFinite;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

int TwinConfig::window_steps() const {
  const double ratio = t_a / spec.dt;
  const int n = static_cast<int>(std::lround(ratio));
  if (n < 1 || std::abs(ratio - n) > 1e-9 * std::max(1.0, std::abs(ratio))) {
    throw ConfigError("window length t_a must be a positive integer multiple of dt");
  }
  return n;
}

std::vector<int> TwinConfig::resolved_components() const {
  if (!obs_components.empty()) return obs_components;
  if (spec.kind == ModelKind::L63) return {0, 2};
  std::vector<int> first_half(spec.n / 2);
  for (int i = 0; i < spec.n / 2; ++i) first_half[i] = i;
  return first_half;
}

void TwinConfig::validate() const {
  spec.validate();
  if (!(var_b > 0.0)) throw ConfigError("var_b must be positive");
  if (!(var_o > 0.0)) throw ConfigError("var_o must be positive");
  if (n_realizations < 1) throw ConfigError("n_r must be at least 1");
  if (workers < 0) throw ConfigError("workers must be non-negative");
  solver.validate();
  const int n_steps = window_steps();
  layout_steps(layout, n_steps);
  const std::vector<int> comps = resolved_components();
  if (comps.empty()) throw ConfigError("no observed components");
  for (int c : comps) {
    if (c < 0 || c >= spec.n) throw ConfigError("observed component index out of range");
  }
}

StateVector make_reference(const ModelSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  StateVector x = rng.uniform_vector(spec.n);
  Trajectory spin_up = propagate(spec, x, kSpinUpSteps);
  return spin_up.states.back();
}

StateVector make_background(const StateVector& x_ref, double var_b, std::uint64_t seed) {
  Rng rng(seed);
  return x_ref + std::sqrt(var_b) * rng.normal_vector(static_cast<int>(x_ref.size()));
}

std::vector<int> layout_steps(ObsLayout layout, int n_steps) {
  switch (layout) {
    case ObsLayout::Nobs1:
      if (n_steps < 1) throw ConfigError("Nobs1 needs at least 1 step");
      return {n_steps};
    case ObsLayout::Nobs2:
      if (n_steps < 2 || n_steps % 2 != 0) throw ConfigError("Nobs2 needs N divisible by 2");
      return {n_steps / 2, n_steps};
    case ObsLayout::Nobs3:
      if (n_steps < 4 || n_steps % 4 != 0) throw ConfigError("Nobs3 needs N divisible by 4");
      return {n_steps / 4, n_steps / 2, 3 * n_steps / 4, n_steps};
    case ObsLayout::Nobs4: {
      if (n_steps < 2 || n_steps % 2 != 0) throw ConfigError("Nobs4 needs N divisible by 2");
      std::vector<int> steps;
      for (int i = 2; i <= n_steps; i += 2) steps.push_back(i);
      return steps;
    }
  }
  throw ConfigError("unknown observation layout");
}

const char* layout_name(ObsLayout layout) {
  switch (layout) {
    case ObsLayout::Nobs1: return "Nobs1";
    case ObsLayout::Nobs2: return "Nobs2";
    case ObsLayout::Nobs3: return "Nobs3";
    case ObsLayout::Nobs4: return "Nobs4";
  }
  return "?";
}

ObservationSet make_observations(const Trajectory& reference, ObsLayout layout,
                                 const std::vector<int>& components, double var_o,
                                 std::uint64_t seed) {
  const std::vector<int> steps = layout_steps(layout, reference.steps());
  const double sigma_o = std::sqrt(var_o);
  Rng rng(seed);
  std::vector<ObsEntry> entries;
  entries.reserve(steps.size());
  for (int step_index : steps) {
    ObsEntry entry;
    entry.step = step_index;
    entry.components = components;
    entry.values.resize(components.size());
    for (std::size_t a = 0; a < components.size(); ++a) {
      entry.values[a] = reference.states[step_index][components[a]] + sigma_o * rng.normal();
    }
    entries.push_back(std::move(entry));
  }
  return ObservationSet::from_entries(std::move(entries), var_o);
}

Realization make_realization(const TwinConfig& cfg, int index) {
  Realization realization;
  realization.index = index;
  const std::uint64_t ref_index = cfg.fresh_reference ? static_cast<std::uint64_t>(index) : 0;
  const std::uint64_t seed_ref = derive_seed(cfg.base_seed, ref_index, SeedStream::Reference);
  realization.seed_b =
      derive_seed(cfg.base_seed, static_cast<std::uint64_t>(index), SeedStream::Background);
  realization.seed_o =
      derive_seed(cfg.base_seed, static_cast<std::uint64_t>(index), SeedStream::Observation);
  realization.x_ref = make_reference(cfg.spec, seed_ref);
  realization.x_b = make_background(realization.x_ref, cfg.var_b, realization.seed_b);
  Trajectory nature_run = propagate(cfg.spec, realization.x_ref, cfg.window_steps());
  realization.obs = make_observations(nature_run, cfg.layout, cfg.resolved_components(),
                                      cfg.var_o, realization.seed_o);
  return realization;
}

AssimilationProblem make_problem(const TwinConfig& cfg, const Realization& realization) {
  AssimilationProblem prob;
  prob.spec = cfg.spec;
  prob.n_steps = cfg.window_steps();
  prob.background = realization.x_b;
  prob.var_b = cfg.var_b;
  prob.obs = realization.obs;
  prob.validate();
  return prob;
}

std::vector<EnsembleResultRow> run_realization(const TwinConfig& cfg,
                                               const Realization& realization,
                                               const TraceObserver& observer) {
  const AssimilationProblem prob = make_problem(cfg, realization);
  const ControlVector v0 = ControlVector::Zero(prob.state_dim());
  std::vector<EnsembleResultRow> rows;
  rows.reserve(3);
  for (Method m : {Method::GN, Method::LS, Method::REG}) {
    SolverOptions opts = cfg.solver;
    opts.method = m;
    SolverTrace trace = solve(prob, v0, opts);
    rows.push_back(row_from_trace(cfg, realization, prob, trace));
    if (observer) observer(realization, opts, trace);
  }
  return rows;
}

ResultTable run_ensemble_serial(const TwinConfig& cfg, const TraceObserver& observer) {
  cfg.validate();
  ResultTable table(3 * static_cast<std::size_t>(cfg.n_realizations));
  for (int i = 0; i < cfg.n_realizations; ++i) {
    std::vector<EnsembleResultRow> rows;
    try {
      rows = run_realization(cfg, make_realization(cfg, i), observer);
    } catch (const std::exception&) {
      rows = failed_rows(i);
    }
    for (std::size_t j = 0; j < rows.size(); ++j) table[3 * i + j] = rows[j];
  }
  return table;
}

ResultTable run_ensemble(const TwinConfig& cfg, const TraceObserver& observer) {
  cfg.validate();
  ResultTable table(3 * static_cast<std::size_t>(cfg.n_realizations));
#ifdef _OPENMP
  const int threads = cfg.workers > 0 ? cfg.workers : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
#endif
  for (int i = 0; i < cfg.n_realizations; ++i) {
    std::vector<EnsembleResultRow> rows;
    try {
      rows = run_realization(cfg, make_realization(cfg, i), observer);
    } catch (const std::exception&) {
      rows = failed_rows(i);
    }
    for (std::size_t j = 0; j < rows.size(); ++j) table[3 * i + j] = rows[j];
  }
  return table;
}

}  // namespace davar
