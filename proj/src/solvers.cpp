#include "davar/solvers.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include <Eigen/Cholesky>

namespace davar {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Mutable state of one outer loop, shared by the three methods. The
// evaluation counters live in the trace; every counted evaluation goes
// through eval_trial()/relinearize().
struct Loop {
  const AssimilationProblem& prob;
  const SolverOptions& opts;
  SolverTrace trace;

  ControlVector v;
  double cost = kNaN;
  Vector r;
  Trajectory traj;
  Matrix J;
  Vector grad;
  Matrix S;
  std::optional<double> prev_accepted_cost;
  int k = 0;
  bool live = true;

  Loop(const AssimilationProblem& p, const SolverOptions& o) : prob(p), opts(o) {
    trace.method = o.method;
  }

  StopState stop_state() const {
    return {trace.l, trace.kJ, prev_accepted_cost, cost, grad.norm()};
  }

  void stop(StopReason reason) {
    trace.stop_reason = reason;
    live = false;
  }

  bool budget_allows(int extra_evals) const {
    return trace.l + trace.kJ + extra_evals <= opts.tau_e;
  }

  // One counted function evaluation; returns nullopt on non-finite blow-up.
  std::optional<Evaluation> eval_trial(const ControlVector& trial_v) {
    ++trace.l;
    try {
      return evaluate(prob, trial_v);
    } catch (const NonFiniteStateError&) {
      return std::nullopt;
    }
  }

  // One counted Jacobian evaluation at the current trajectory; refreshes
  // grad and the GN Hessian. Returns false on non-finite output.
  bool relinearize() {
    ++trace.kJ;
    try {
      J = jacobian(prob, traj);
    } catch (const NonFiniteStateError&) {
      return false;
    }
    grad = J.transpose() * r;
    S = J.transpose() * J;
    trace.final_grad_norm = grad.norm();
    return grad.allFinite() && S.allFinite();
  }

  // Initial evaluation pair at v0 (counts l = 1 and kJ = 1).
  bool initialize(const ControlVector& v0) {
    trace.initial_v = v0;
    trace.final_v = v0;
    trace.best_v = v0;
    trace.initial_cost = trace.final_cost = trace.best_cost = kNaN;
    trace.final_grad_norm = kNaN;
    v = v0;
    std::optional<Evaluation> e = eval_trial(v0);
    if (!e) {
      stop(StopReason::NonFinite);
      return false;
    }
    cost = e->cost;
    r = std::move(e->residual);
    traj = std::move(e->trajectory);
    trace.initial_cost = trace.final_cost = trace.best_cost = cost;
    if (!relinearize()) {
      stop(StopReason::NonFinite);
      return false;
    }
    return true;
  }

  void accept(const ControlVector& new_v, Evaluation&& e, double step_norm) {
    prev_accepted_cost = cost;
    v = new_v;
    cost = e.cost;
    r = std::move(e.residual);
    traj = std::move(e.trajectory);
    trace.final_v = v;
    trace.final_cost = cost;
    trace.final_step_norm = step_norm;
    if (cost < trace.best_cost) {
      trace.best_cost = cost;
      trace.best_v = v;
    }
  }

  IterationRecord make_record(double trial_cost, double step_norm, bool accepted,
                              double alpha_or_gamma, double dir_deriv, double pred) const {
    IterationRecord rec;
    rec.k = k;
    rec.l_so_far = trace.l;
    rec.kJ_so_far = trace.kJ;
    rec.cost = trial_cost;
    rec.grad_norm = grad.norm();
    rec.step_norm = step_norm;
    rec.accepted = accepted;
    rec.alpha_or_gamma = alpha_or_gamma;
    rec.dir_deriv = dir_deriv;
    rec.pred_decrease = pred;
    return rec;
  }
};

}  // namespace

void SolverOptions::validate() const {
  if (tau_e < 2) throw ConfigError("tau_e must be at least 2");
  if (!(tau_s > 0.0)) throw ConfigError("tau_s must be positive");
  if (!(tau_g > 0.0)) throw ConfigError("tau_g must be positive");
  if (!(ls.alpha0 > 0.0)) throw ConfigError("alpha0 must be positive");
  if (!(ls.beta > 0.0 && ls.beta < 1.0)) throw ConfigError("beta must be in (0,1)");
  if (!(ls.tau > 0.0 && ls.tau < 1.0)) throw ConfigError("tau must be in (0,1)");
  if (ls.max_backtracks < 1) throw ConfigError("max_backtracks must be at least 1");
  if (!(reg.gamma0 > 0.0)) throw ConfigError("gamma0 must be positive");
  if (!(reg.eta1 > 0.0 && reg.eta1 <= reg.eta2 && reg.eta2 < 1.0)) {
    throw ConfigError("eta parameters must satisfy 0 < eta1 <= eta2 < 1");
  }
  if (!(reg.decrease > 0.0 && reg.decrease < 1.0)) throw ConfigError("bad gamma decrease factor");
  if (!(reg.increase > 1.0)) throw ConfigError("bad gamma increase factor");
}

Vector spd_solve(const Matrix& a, const Vector& b) {
  if (a.rows() != a.cols() || a.rows() != b.size()) {
    throw std::invalid_argument("spd_solve dimension mismatch");
  }
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw NotSpdError("Cholesky factorization failed on a matrix expected to be SPD");
  }
  return llt.solve(b);
}

std::optional<StopReason> check_stop(const StopState& state, const PendingEvals& pending,
                                     const SolverOptions& opts) {
  if (state.grad_norm == 0.0) return StopReason::GradNorm;
  if (opts.stop_mode == StopMode::GradNorm) {
    if (state.grad_norm <= opts.tau_g) return StopReason::GradNorm;
  } else if (state.prev_accepted_cost) {
    const double rel =
        std::abs(*state.prev_accepted_cost - state.current_cost) / (1.0 + state.current_cost);
    if (rel <= opts.tau_s) return StopReason::RelFunc;
  }
  if (state.l + state.kJ + pending.functions + pending.jacobians > opts.tau_e) {
    return StopReason::Budget;
  }
  return std::nullopt;
}

SolverTrace solve_gn(const AssimilationProblem& prob, const ControlVector& v0,
                     const SolverOptions& opts) {
  opts.validate();
  Loop loop(prob, opts);
  loop.trace.method = Method::GN;
  if (!loop.initialize(v0)) return loop.trace;

  while (loop.live) {
    // A GN iteration always costs one function plus one Jacobian evaluation.
    if (auto reason = check_stop(loop.stop_state(), {1, 1}, opts)) {
      loop.stop(*reason);
      break;
    }
    Vector s = spd_solve(loop.S, -loop.grad);
    const double dir_deriv = loop.grad.dot(s);
    const double step_norm = s.norm();
    ControlVector trial_v = loop.v + s;
    IterationRecord rec = loop.make_record(kNaN, step_norm, false, 1.0, dir_deriv, 0.0);

    std::optional<Evaluation> e = loop.eval_trial(trial_v);
    if (!e) {
      rec.l_so_far = loop.trace.l;
      loop.trace.iterations.push_back(rec);
      loop.stop(StopReason::NonFinite);
      break;
    }
    rec.cost = e->cost;
    rec.accepted = true;
    loop.accept(trial_v, std::move(*e), step_norm);
    const bool relin_ok = loop.relinearize();
    rec.l_so_far = loop.trace.l;
    rec.kJ_so_far = loop.trace.kJ;
    loop.trace.iterations.push_back(rec);
    if (!relin_ok) {
      loop.stop(StopReason::NonFinite);
      break;
    }
    ++loop.k;
  }
  return loop.trace;
}

SolverTrace solve_ls(const AssimilationProblem& prob, const ControlVector& v0,
                     const SolverOptions& opts) {
  opts.validate();
  Loop loop(prob, opts);
  loop.trace.method = Method::LS;
  if (!loop.initialize(v0)) return loop.trace;

  while (loop.live) {
    if (auto reason = check_stop(loop.stop_state(), {1, 0}, opts)) {
      loop.stop(*reason);
      break;
    }
    Vector s = spd_solve(loop.S, -loop.grad);
    const double dir_deriv = loop.grad.dot(s);

    double alpha = opts.ls.alpha0;
    int backtracks = 0;
    bool accepted = false;
    while (!accepted) {
      if (!loop.budget_allows(1)) {
        loop.stop(StopReason::Budget);
        break;
      }
      ControlVector trial_v = loop.v + alpha * s;
      const double step_norm = alpha * s.norm();
      std::optional<Evaluation> e = loop.eval_trial(trial_v);
      const double trial_cost = e ? e->cost : kNaN;
      // Armijo sufficient decrease; a non-finite trial fails it and keeps
      // backtracking.
      const bool armijo =
          e && trial_cost <= loop.cost + opts.ls.beta * alpha * dir_deriv;
      IterationRecord rec =
          loop.make_record(trial_cost, step_norm, armijo, alpha, dir_deriv, 0.0);
      loop.trace.iterations.push_back(rec);
      if (armijo) {
        loop.accept(trial_v, std::move(*e), step_norm);
        accepted = true;
        break;
      }
      ++backtracks;
      if (backtracks > opts.ls.max_backtracks) {
        loop.stop(StopReason::MaxBacktracks);
        break;
      }
      alpha *= opts.ls.tau;
    }
    if (!loop.live) break;

    // The Jacobian is refreshed only after an accepted step.
    if (!loop.budget_allows(1)) {
      loop.stop(StopReason::Budget);
      break;
    }
    if (!loop.relinearize()) {
      loop.stop(StopReason::NonFinite);
      break;
    }
    ++loop.k;
  }
  return loop.trace;
}

SolverTrace solve_reg(const AssimilationProblem& prob, const ControlVector& v0,
                      const SolverOptions& opts) {
  opts.validate();
  Loop loop(prob, opts);
  loop.trace.method = Method::REG;
  if (!loop.initialize(v0)) return loop.trace;

  const int n = prob.state_dim();
  double gamma = opts.reg.gamma0;

  while (loop.live) {
    if (auto reason = check_stop(loop.stop_state(), {1, 0}, opts)) {
      loop.stop(*reason);
      break;
    }
    Matrix damped = loop.S + gamma * Matrix::Identity(n, n);
    Vector s = spd_solve(damped, -loop.grad);
    const double step_norm = s.norm();
    const double dir_deriv = loop.grad.dot(s);

    const double model_value =
        0.5 * (loop.J * s + loop.r).squaredNorm() + 0.5 * gamma * s.squaredNorm();
    double pred = loop.cost - model_value;
    if (pred <= 0.0) {
      // With the exact solve, J(v) - m(s) = 0.5 s^T (S + gamma I) s = -0.5 s^T grad.
      // The direct formula can cancel to roundoff near stationarity; the
      // identity cannot go nonpositive unless the solve itself is broken.
      const double stable_pred = -0.5 * dir_deriv;
      if (stable_pred <= 0.0) {
        throw std::logic_error("regularised model predicts no decrease at a nonzero gradient");
      }
      pred = stable_pred;
    }

    ControlVector trial_v = loop.v + s;
    std::optional<Evaluation> e = loop.eval_trial(trial_v);
    const double trial_cost = e ? e->cost : kNaN;
    const double rho = (loop.cost - trial_cost) / pred;
    const bool successful = e && rho >= opts.reg.eta1;

    IterationRecord rec =
        loop.make_record(trial_cost, step_norm, successful, gamma, dir_deriv, pred);
    loop.trace.iterations.push_back(rec);

    if (successful) {
      loop.accept(trial_v, std::move(*e), step_norm);
      if (rho >= opts.reg.eta2) gamma *= opts.reg.decrease;
      if (!loop.budget_allows(1)) {
        loop.stop(StopReason::Budget);
        break;
      }
      if (!loop.relinearize()) {
        loop.stop(StopReason::NonFinite);
        break;
      }
    } else {
      gamma *= opts.reg.increase;
    }
    ++loop.k;
  }
  return loop.trace;
}

SolverTrace solve(const AssimilationProblem& prob, const ControlVector& v0,
                  const SolverOptions& opts) {
  prob.validate();
  switch (opts.method) {
    case Method::GN:
      return solve_gn(prob, v0, opts);
    case Method::LS:
      return solve_ls(prob, v0, opts);
    case Method::REG:
      return solve_reg(prob, v0, opts);
  }
  throw std::logic_error("unknown method");
}

TraceAudit audit_trace(const SolverTrace& trace, const SolverOptions& opts) {
  TraceAudit audit;
  audit.budget_ok = trace.l + trace.kJ <= opts.tau_e;

  int accepted_count = 0;
  double current_cost = trace.initial_cost;
  double prev_gamma = kNaN;
  bool prev_was_reg_record = false;
  bool prev_successful = false;
  double prev_rho = kNaN;

  for (const IterationRecord& rec : trace.iterations) {
    if (trace.method == Method::REG) {
      const double rho = (current_cost - rec.cost) / rec.pred_decrease;
      if (prev_was_reg_record) {
        double expected = prev_gamma;
        if (prev_successful) {
          if (prev_rho >= opts.reg.eta2) expected *= opts.reg.decrease;
        } else {
          expected *= opts.reg.increase;
        }
        if (rec.alpha_or_gamma != expected) ++audit.gamma_update_violations;
      }
      prev_was_reg_record = true;
      prev_gamma = rec.alpha_or_gamma;
      prev_successful = rec.accepted;
      prev_rho = rho;
      if (rec.accepted) {
        if (!(rho >= opts.reg.eta1)) ++audit.rho_violations;
        if (!(rec.cost <= current_cost)) ++audit.monotonicity_violations;
      }
    }
    if (trace.method == Method::LS && rec.accepted) {
      const double bound =
          current_cost + opts.ls.beta * rec.alpha_or_gamma * rec.dir_deriv;
      if (!(rec.cost <= bound)) ++audit.armijo_violations;
      if (!(rec.cost < current_cost)) ++audit.monotonicity_violations;
    }
    if (rec.accepted) {
      ++accepted_count;
      current_cost = rec.cost;
    }
  }

  audit.counts_ok = trace.kJ <= trace.l;
  if (trace.method == Method::GN) {
    const bool paired = trace.kJ == trace.l;
    const bool aborted = trace.stop_reason == StopReason::NonFinite && trace.l == trace.kJ + 1;
    audit.counts_ok = audit.counts_ok && (paired || aborted);
  } else {
    // One Jacobian per accepted iterate plus the initial one, unless the
    // run ended with the final Jacobian unaffordable or non-finite.
    const bool complete = trace.kJ == accepted_count + 1;
    const bool truncated = (trace.stop_reason == StopReason::Budget ||
                            trace.stop_reason == StopReason::NonFinite) &&
                           trace.kJ == accepted_count;
    audit.counts_ok = audit.counts_ok && (complete || truncated);
  }
  return audit;
}

const char* method_name(Method m) {
  switch (m) {
    case Method::GN: return "GN";
    case Method::LS: return "LS";
    case Method::REG: return "REG";
  }
  return "?";
}

const char* stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::Budget: return "Budget";
    case StopReason::RelFunc: return "RelFunc";
    case StopReason::GradNorm: return "GradNorm";
    case StopReason::MaxBacktracks: return "MaxBacktracks";
    case StopReason::NonFinite: return "NonFinite";
  }
  return "?";
}

}  // namespace davar
