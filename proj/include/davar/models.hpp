#pragma once

#include <vector>

#include "davar/types.hpp"

namespace davar {

enum class ModelKind { L63, L96 };

/// Which explicit second-order scheme drives the L63 model.
enum class Rk2Variant { Heun, Midpoint };

struct L63Params {
  double sigma = 10.0;
  double rho = 28.0;
  double beta = 8.0 / 3.0;
};

struct L96Params {
  double forcing = 8.0;
};

/// Dynamical model description: kind, dimension, time step and parameters.
/// L63 integrates with RK2 (Heun by default), L96 with classical RK4.
struct ModelSpec {
  ModelKind kind = ModelKind::L63;
  int n = 3;
  double dt = 0.025;
  L63Params l63;
  L96Params l96;
  Rk2Variant rk2 = Rk2Variant::Heun;

  static ModelSpec lorenz63(double dt = 0.025, L63Params params = {},
                            Rk2Variant variant = Rk2Variant::Heun);
  static ModelSpec lorenz96(int n = 40, double dt = 0.025, L96Params params = {});

  /// Throws ConfigError if the dimension/step constraints are violated.
  void validate() const;
};

/// States at steps 0..N of one nonlinear model run.
struct Trajectory {
  std::vector<StateVector> states;
  double dt = 0.0;

  int steps() const { return static_cast<int>(states.size()) - 1; }
};

/// Time derivative of the model at x.
StateVector rhs(const ModelSpec& spec, const StateVector& x);

/// Jacobian of `rhs` at x; entry (a,b) = d rhs_a / d x_b.
Matrix rhs_jacobian(const ModelSpec& spec, const StateVector& x);

/// One explicit RK step of size spec.dt. Throws NonFiniteStateError on
/// NaN/Inf output.
StateVector step(const ModelSpec& spec, const StateVector& x);

/// Exact Jacobian of `step` at x (chain rule through the RK stages).
Matrix step_tlm(const ModelSpec& spec, const StateVector& x);

/// Integrate n_steps steps from x0; states[i] = step^i(x0). On blow-up the
/// thrown NonFiniteStateError carries the failing step index.
Trajectory propagate(const ModelSpec& spec, const StateVector& x0, int n_steps);

/// Tangent linear of the i-step propagation along a stored trajectory:
/// the product of per-step TLMs, with the i = 0 case the identity.
Matrix propagate_tlm(const ModelSpec& spec, const Trajectory& traj, int i);

}  // namespace davar
