#pragma once

#include <optional>
#include <vector>

#include "davar/assim.hpp"
#include "davar/types.hpp"

namespace davar {

enum class Method { GN, LS, REG };

/// Which criteria are active besides the evaluation budget.
enum class StopMode { RelFunc, GradNorm };

enum class StopReason { Budget, RelFunc, GradNorm, MaxBacktracks, NonFinite };

struct LineSearchOptions {
  double alpha0 = 1.0;      // first trial step length
  double beta = 0.1;        // Armijo sufficient-decrease factor
  double tau = 0.5;         // backtracking shrink factor
  int max_backtracks = 60;  // guards against floating-point stagnation
};

struct RegOptions {
  double gamma0 = 1.0;
  double eta1 = 0.1;       // acceptance threshold on the rho ratio
  double eta2 = 0.9;       // "very successful" threshold
  double decrease = 0.5;   // gamma factor after a very successful iteration
  double increase = 2.0;   // gamma factor after an unsuccessful iteration
};

struct SolverOptions {
  Method method = Method::GN;
  int tau_e = 8;            // cap on k_J + l
  double tau_s = 1e-5;      // relative-function tolerance
  double tau_g = 1e-5;      // gradient-norm tolerance (GradNorm mode)
  StopMode stop_mode = StopMode::RelFunc;
  LineSearchOptions ls;
  RegOptions reg;

  void validate() const;
};

/// One recorded step computation/trial. Failed line-search trials and
/// rejected regularised steps appear with accepted = false; only accepted
/// records advance the iterate.
struct IterationRecord {
  int k = 0;                 // outer iteration (step computation) index
  int l_so_far = 0;          // function evaluations after this record
  int kJ_so_far = 0;         // Jacobian evaluations after this record
  double cost = 0.0;         // cost at the trial point (NaN if non-finite)
  double grad_norm = 0.0;    // gradient norm at the linearisation point
  double step_norm = 0.0;    // norm of the attempted update
  bool accepted = false;
  double alpha_or_gamma = 1.0;  // alpha for LS, gamma for REG, 1 for GN
  double dir_deriv = 0.0;       // s^T grad at the linearisation point (GN/LS)
  double pred_decrease = 0.0;   // J(v) - m(s) for REG, 0 otherwise
};

struct SolverTrace {
  Method method = Method::GN;
  std::vector<IterationRecord> iterations;
  ControlVector initial_v;
  ControlVector final_v;  // last iterate whose cost was evaluated and accepted
  ControlVector best_v;   // accepted iterate with the lowest cost (incl. initial)
  double initial_cost = 0.0;
  double final_cost = 0.0;
  double best_cost = 0.0;
  double final_grad_norm = 0.0;  // at the last linearisation point
  double final_step_norm = 0.0;  // last accepted update norm
  int l = 0;                     // function evaluations
  int kJ = 0;                    // Jacobian evaluations
  StopReason stop_reason = StopReason::Budget;
};

/// Direct symmetric positive definite solve (Cholesky). Throws NotSpdError
/// if the factorization breaks down.
Vector spd_solve(const Matrix& a, const Vector& b);

SolverTrace solve_gn(const AssimilationProblem& prob, const ControlVector& v0,
                     const SolverOptions& opts);
SolverTrace solve_ls(const AssimilationProblem& prob, const ControlVector& v0,
                     const SolverOptions& opts);
SolverTrace solve_reg(const AssimilationProblem& prob, const ControlVector& v0,
                      const SolverOptions& opts);

/// Dispatch on opts.method.
SolverTrace solve(const AssimilationProblem& prob, const ControlVector& v0,
                  const SolverOptions& opts);

/// Evaluation-count state as seen by the stopping rules.
struct StopState {
  int l = 0;
  int kJ = 0;
  std::optional<double> prev_accepted_cost;  // cost of the previous accepted iterate
  double current_cost = 0.0;
  double grad_norm = 0.0;
};

/// Evaluations the solver is about to spend if it continues.
struct PendingEvals {
  int functions = 0;
  int jacobians = 0;
};

/// First stopping criterion that fires, if any. The budget test rejects any
/// pending work that would push k_J + l beyond tau_e; an exactly-zero
/// gradient stops in every mode.
std::optional<StopReason> check_stop(const StopState& state, const PendingEvals& pending,
                                     const SolverOptions& opts);

/// Re-asserts the safeguard contracts from a recorded trace: the Armijo
/// inequality at every accepted LS step, rho >= eta1 and monotone accepted
/// costs for REG, and the evaluation budget for all methods.
struct TraceAudit {
  int armijo_violations = 0;
  int rho_violations = 0;
  int monotonicity_violations = 0;
  int gamma_update_violations = 0;
  bool budget_ok = true;
  bool counts_ok = true;

  bool clean() const {
    return armijo_violations == 0 && rho_violations == 0 && monotonicity_violations == 0 &&
           gamma_update_violations == 0 && budget_ok && counts_ok;
  }
};

TraceAudit audit_trace(const SolverTrace& trace, const SolverOptions& opts);

const char* method_name(Method m);
const char* stop_reason_name(StopReason r);

}  // namespace davar
