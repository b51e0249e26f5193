#pragma once

#include <vector>

#include "davar/twin.hpp"

namespace davar {

/// RMSE of the analysis error: ||x_a - x_ref||_2 / sqrt(n).
double analysis_rmse(const StateVector& x_a, const StateVector& x_ref);

/// Per-realization truth: the smallest best-within-budget cost any method
/// obtained, used as the reference value of the solved criterion.
struct TruthInfo {
  int realization = 0;
  double cost_initial = 0.0;
  double cost_truth = 0.0;
  Method owner = Method::GN;  // first method attaining the truth (GN, LS, REG order)
  bool excluded = false;      // every method non-finite
  bool degenerate = false;    // no method improved on the initial cost
};

/// Groups a result table by realization and selects the truth for each.
std::vector<TruthInfo> select_truths(const ResultTable& table);

/// Solved criterion: (J_best - J_t) / (J_0 - J_t) <= tau_f, boundary
/// inclusive. Degenerate realizations (J_0 = J_t) count as solved.
bool solved_flag(double cost_best, double cost_initial, double cost_truth, double tau_f);

/// Fractions of realizations solved per method over a tolerance grid.
struct ProfileCurve {
  std::vector<double> x;  // grid (accuracy: -log10(tau_f); RMSE: threshold)
  std::vector<Method> methods;
  std::vector<std::vector<double>> fractions;  // [method][grid point]
};

/// The accuracy exponents i = 0, 0.01, ..., 5 (tau_f = 10^-i).
std::vector<double> default_accuracy_grid();

/// Accuracy profile over the exponent grid; x is reported as -log10(tau_f).
ProfileCurve accuracy_profile(const ResultTable& table,
                              const std::vector<double>& exponents = default_accuracy_grid());

/// RMSE profile: a (realization, method) pair counts at threshold rho iff
/// it is solved at tau_f and its analysis RMSE is <= rho. The grid spans
/// [0, max observed RMSE].
ProfileCurve rmse_profile(const ResultTable& table, double tau_f = 1e-3, int grid_points = 200);

}  // namespace davar
