#pragma once

#include <functional>
#include <string>
#include <vector>

#include "davar/config.hpp"
#include "davar/twin.hpp"

namespace davar {

/// Outcome of one numerical check.
struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

/// Max relative error between the analytic gradient and a central
/// finite-difference gradient of the cost (step h per component).
double fd_gradient_rel_error(const AssimilationProblem& prob, const ControlVector& v, double h);

/// Max per-column relative error between the analytic Jacobian and central
/// finite differences of the residual.
double fd_jacobian_rel_error(const AssimilationProblem& prob, const ControlVector& v, double h);

/// First-order Taylor remainder study of a map/Jacobian pair along one
/// direction:
///   e(eps) = |map(x + eps d) - map(x) - eps A d| / |eps d|
/// over a halving epsilon sequence. For an exact Jacobian e(eps) shrinks
/// linearly, so consecutive ratios e(eps)/e(eps/2) approach 2. Ratios are
/// reported only where both remainders sit above the rounding-noise
/// estimate (the linear-convergence regime).
struct TaylorTest {
  std::vector<double> epsilons;
  std::vector<double> remainders;
  std::vector<double> ratios;
};

TaylorTest taylor_test(const std::function<StateVector(const StateVector&)>& map,
                       const std::function<Matrix(const StateVector&)>& map_jacobian,
                       const StateVector& x, const StateVector& direction, double eps0 = 1e-2,
                       int halvings = 14);

/// Taylor study of the one-step map against its tangent linear model.
TaylorTest tlm_taylor_test(const ModelSpec& spec, const StateVector& x,
                           const StateVector& direction);

/// Smallest eigenvalue of the Gauss-Newton Hessian at v (>= 1 by
/// construction of the preconditioned problem).
double min_gn_hessian_eigenvalue(const AssimilationProblem& prob, const ControlVector& v);

/// The i-th random check problem for a twin configuration, plus a random
/// control point. Deterministic in (cfg.base_seed, i).
struct CheckProblem {
  AssimilationProblem problem;
  ControlVector v;
};
CheckProblem make_check_problem(const TwinConfig& cfg, int index);

/// The full verification suite over n_problems random problems: FD
/// gradient/Jacobian checks, TLM Taylor test, the Hessian eigenvalue bound,
/// one-iteration exactness on an affine problem, and safeguard audits of
/// solver traces.
std::vector<CheckResult> run_verification(const ExperimentConfig& config, int n_problems = 20);

}  // namespace davar
