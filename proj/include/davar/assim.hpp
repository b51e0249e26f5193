#pragma once

#include <vector>

#include "davar/models.hpp"
#include "davar/types.hpp"

namespace davar {

/// Observations of selected state components at one window step.
struct ObsEntry {
  int step = 0;                 // time index in [0, N]
  std::vector<int> components;  // state indices observed (rows of H_i)
  Vector values;                // y_i, aligned with `components`
};

/// All observations in the window, ordered by increasing step, sharing one
/// observation error variance.
struct ObservationSet {
  std::vector<ObsEntry> entries;
  double var_o = 1.0;

  /// Total observation count p.
  int total_dim() const;

  /// Sorts entries by step, then validates.
  static ObservationSet from_entries(std::vector<ObsEntry> entries, double var_o);

  /// Throws ConfigError on: non-increasing steps, duplicate/out-of-range
  /// components, value/component length mismatch, var_o <= 0.
  void validate(int state_dim, int n_steps) const;
};

/// The preconditioned nonlinear least-squares problem over the control
/// variable v, with x_0 = sigma_b * v + background and B = var_b * I.
struct AssimilationProblem {
  ModelSpec spec;
  int n_steps = 0;           // window length in steps (t_a = n_steps * dt)
  StateVector background;    // x_0^b
  double var_b = 1.0;        // sigma_b^2
  ObservationSet obs;

  int state_dim() const { return spec.n; }
  int obs_dim() const { return obs.total_dim(); }
  int residual_dim() const { return spec.n + obs.total_dim(); }
  double sigma_b() const;
  double sigma_o() const;

  void validate() const;
};

StateVector control_to_state(const AssimilationProblem& prob, const ControlVector& v);
ControlVector state_to_control(const AssimilationProblem& prob, const StateVector& x0);

/// Residual, cost and the nonlinear trajectory from one model integration.
/// Residual/cost/Jacobian at the same v all reuse this single integration.
struct Evaluation {
  Vector residual;
  Trajectory trajectory;
  double cost = 0.0;
};

/// One function evaluation: integrates the model once and stacks
/// [v; (y_i - H_i x_i)/sigma_o ...] in increasing step order.
Evaluation evaluate(const AssimilationProblem& prob, const ControlVector& v);

Vector residual(const AssimilationProblem& prob, const ControlVector& v);
double cost(const AssimilationProblem& prob, const ControlVector& v);

/// Residual Jacobian assembled along an already-computed trajectory:
/// identity on top, then -(sigma_b/sigma_o) * H_i * M_{0,i} per entry.
Matrix jacobian(const AssimilationProblem& prob, const Trajectory& traj);
Matrix jacobian(const AssimilationProblem& prob, const ControlVector& v);

/// J(v)^T r(v) with both factors evaluated at the same trajectory.
Vector gradient(const AssimilationProblem& prob, const ControlVector& v);

/// Gauss-Newton Hessian I + sum (var_b/var_o) (H_i M_{0,i})^T (H_i M_{0,i}),
/// assembled from the structured sum rather than an explicit J^T J product.
Matrix gn_hessian(const AssimilationProblem& prob, const ControlVector& v);
Matrix gn_hessian(const AssimilationProblem& prob, const Trajectory& traj);

/// Ratio of extreme eigenvalues of a symmetric positive definite matrix.
double condition_number(const Matrix& s);

}  // namespace davar
