#include "davar/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace davar {

namespace {

struct GroupedRows {
  std::vector<int> realizations;                        // sorted realization ids
  std::map<int, std::vector<const EnsembleResultRow*>> by_realization;
  std::vector<Method> methods;                          // in GN, LS, REG order
};

GroupedRows group_rows(const ResultTable& table) {
  if (table.empty()) throw std::invalid_argument("empty result table");
  GroupedRows grouped;
  bool has_method[3] = {false, false, false};
  for (const EnsembleResultRow& row : table) {
    grouped.by_realization[row.seed_index].push_back(&row);
    has_method[static_cast<int>(row.method)] = true;
  }
  for (const auto& [index, rows] : grouped.by_realization) grouped.realizations.push_back(index);
  for (Method m : {Method::GN, Method::LS, Method::REG}) {
    if (has_method[static_cast<int>(m)]) grouped.methods.push_back(m);
  }
  return grouped;
}

TruthInfo select_truth(int realization, const std::vector<const EnsembleResultRow*>& rows) {
  TruthInfo info;
  info.realization = realization;
  info.excluded = true;
  double best = std::numeric_limits<double>::infinity();
  for (Method m : {Method::GN, Method::LS, Method::REG}) {
    for (const EnsembleResultRow* row : rows) {
      if (row->method != m || !std::isfinite(row->cost_best)) continue;
      if (info.excluded) info.cost_initial = row->cost_initial;
      info.excluded = false;
      if (row->cost_best < best) {
        best = row->cost_best;
        info.owner = m;
      }
    }
  }
  if (!info.excluded) {
    info.cost_truth = best;
    info.degenerate = !(info.cost_initial > info.cost_truth);
  }
  return info;
}

}  // namespace

double analysis_rmse(const StateVector& x_a, const StateVector& x_ref) {
  if (x_a.size() != x_ref.size()) throw std::invalid_argument("analysis/reference size mismatch");
  return (x_a - x_ref).norm() / std::sqrt(static_cast<double>(x_a.size()));
}

std::vector<TruthInfo> select_truths(const ResultTable& table) {
  GroupedRows grouped = group_rows(table);
  std::vector<TruthInfo> truths;
  truths.reserve(grouped.realizations.size());
  for (int realization : grouped.realizations) {
    truths.push_back(select_truth(realization, grouped.by_realization[realization]));
  }
  return truths;
}

bool solved_flag(double cost_best, double cost_initial, double cost_truth, double tau_f) {
  if (!std::isfinite(cost_best)) return false;
  const double denom = cost_initial - cost_truth;
  if (!(denom > 0.0)) return true;  // degenerate: truth already at the initial cost
  return (cost_best - cost_truth) / denom <= tau_f;
}

std::vector<double> default_accuracy_grid() {
  std::vector<double> exponents;
  exponents.reserve(501);
  for (int i = 0; i <= 500; ++i) exponents.push_back(0.01 * i);
  return exponents;
}

ProfileCurve accuracy_profile(const ResultTable& table, const std::vector<double>& exponents) {
  GroupedRows grouped = group_rows(table);
  const double n_r = static_cast<double>(grouped.realizations.size());

  ProfileCurve curve;
  curve.x = exponents;
  curve.methods = grouped.methods;
  curve.fractions.assign(grouped.methods.size(), std::vector<double>(exponents.size(), 0.0));

  for (int realization : grouped.realizations) {
    const auto& rows = grouped.by_realization[realization];
    const TruthInfo truth = select_truth(realization, rows);
    if (truth.excluded) continue;
    for (const EnsembleResultRow* row : rows) {
      const auto method_pos =
          std::find(curve.methods.begin(), curve.methods.end(), row->method) -
          curve.methods.begin();
      for (std::size_t g = 0; g < exponents.size(); ++g) {
        const double tau_f = std::pow(10.0, -exponents[g]);
        if (solved_flag(row->cost_best, truth.cost_initial, truth.cost_truth, tau_f)) {
          curve.fractions[method_pos][g] += 1.0;
        }
      }
    }
  }
  for (auto& per_method : curve.fractions) {
    for (double& f : per_method) f /= n_r;
  }
  return curve;
}

ProfileCurve rmse_profile(const ResultTable& table, double tau_f, int grid_points) {
  if (grid_points < 2) throw std::invalid_argument("rmse grid needs at least 2 points");
  GroupedRows grouped = group_rows(table);
  const double n_r = static_cast<double>(grouped.realizations.size());

  double max_rmse = 0.0;
  for (const EnsembleResultRow& row : table) {
    if (std::isfinite(row.rmse)) max_rmse = std::max(max_rmse, row.rmse);
  }

  ProfileCurve curve;
  curve.x.resize(grid_points);
  for (int g = 0; g < grid_points; ++g) {
    curve.x[g] = max_rmse * static_cast<double>(g) / static_cast<double>(grid_points - 1);
  }
  curve.methods = grouped.methods;
  curve.fractions.assign(grouped.methods.size(), std::vector<double>(grid_points, 0.0));

  for (int realization : grouped.realizations) {
    const auto& rows = grouped.by_realization[realization];
    const TruthInfo truth = select_truth(realization, rows);
    if (truth.excluded) continue;
    for (const EnsembleResultRow* row : rows) {
      if (!solved_flag(row->cost_best, truth.cost_initial, truth.cost_truth, tau_f)) continue;
      if (!std::isfinite(row->rmse)) continue;
      const auto method_pos =
          std::find(curve.methods.begin(), curve.methods.end(), row->method) -
          curve.methods.begin();
      for (int g = 0; g < grid_points; ++g) {
        if (row->rmse <= curve.x[g]) curve.fractions[method_pos][g] += 1.0;
      }
    }
  }
  for (auto& per_method : curve.fractions) {
    for (double& f : per_method) f /= n_r;
  }
  return curve;
}

}  // namespace davar
