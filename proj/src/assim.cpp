#include "davar/assim.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include <Eigen/Eigenvalues>

namespace davar {

namespace {

// Applies H_i: selects the observed components of a state.
Vector select_components(const StateVector& x, const std::vector<int>& components) {
  Vector out(components.size());
  for (std::size_t a = 0; a < components.size(); ++a) out[a] = x[components[a]];
  return out;
}

// Selects the observed rows of a TLM product (H_i * M).
Matrix select_rows(const Matrix& m, const std::vector<int>& components) {
  Matrix out(components.size(), m.cols());
  for (std::size_t a = 0; a < components.size(); ++a) out.row(a) = m.row(components[a]);
  return out;
}

// Walks the trajectory once, accumulating the per-step TLM product, and
// returns H_i * M_{0,i} for every observation entry.
std::vector<Matrix> obs_tlm_blocks(const AssimilationProblem& prob, const Trajectory& traj) {
  const int n = prob.state_dim();
  std::vector<Matrix> blocks;
  blocks.reserve(prob.obs.entries.size());
  Matrix m = Matrix::Identity(n, n);
  int reached = 0;
  for (const ObsEntry& entry : prob.obs.entries) {
    for (; reached < entry.step; ++reached) {
      m = step_tlm(prob.spec, traj.states[reached]) * m;
    }
    blocks.push_back(select_rows(m, entry.components));
  }
  return blocks;
}

void require_control(const AssimilationProblem& prob, const ControlVector& v) {
  if (v.size() != prob.state_dim()) {
    throw std::invalid_argument("control dimension " + std::to_string(v.size()) +
                                " does not match state dimension " +
                                std::to_string(prob.state_dim()));
  }
}

}  // namespace

int ObservationSet::total_dim() const {
  int p = 0;
  for (const ObsEntry& e : entries) p += static_cast<int>(e.components.size());
  return p;
}

ObservationSet ObservationSet::from_entries(std::vector<ObsEntry> entries, double var_o) {
  std::sort(entries.begin(), entries.end(),
            [](const ObsEntry& a, const ObsEntry& b) { return a.step < b.step; });
  ObservationSet set;
  set.entries = std::move(entries);
  set.var_o = var_o;
  return set;
}

void ObservationSet::validate(int state_dim, int n_steps) const {
  if (!(var_o > 0.0)) throw ConfigError("observation variance must be positive");
  int prev_step = -1;
  for (const ObsEntry& e : entries) {
    if (e.step <= prev_step) throw ConfigError("observation steps must be strictly increasing");
    prev_step = e.step;
    if (e.step < 0 || e.step > n_steps) {
      throw ConfigError("observation step " + std::to_string(e.step) + " outside window [0, " +
                        std::to_string(n_steps) + "]");
    }
    if (e.components.empty()) throw ConfigError("observation entry with no components");
    if (static_cast<int>(e.components.size()) != e.values.size()) {
      throw ConfigError("observation values/components length mismatch");
    }
    std::unordered_set<int> seen;
    for (int c : e.components) {
      if (c < 0 || c >= state_dim) throw ConfigError("observed component index out of range");
      if (!seen.insert(c).second) throw ConfigError("duplicate observed component index");
    }
  }
}

double AssimilationProblem::sigma_b() const { return std::sqrt(var_b); }
double AssimilationProblem::sigma_o() const { return std::sqrt(obs.var_o); }

void AssimilationProblem::validate() const {
  spec.validate();
  if (n_steps < 0) throw ConfigError("window length must be non-negative");
  if (background.size() != spec.n) throw ConfigError("background dimension mismatch");
  if (!(var_b > 0.0)) throw ConfigError("background variance must be positive");
  obs.validate(spec.n, n_steps);
}

StateVector control_to_state(const AssimilationProblem& prob, const ControlVector& v) {
  require_control(prob, v);
  return prob.sigma_b() * v + prob.background;
}

ControlVector state_to_control(const AssimilationProblem& prob, const StateVector& x0) {
  require_control(prob, x0);
  return (x0 - prob.background) / prob.sigma_b();
}

Evaluation evaluate(const AssimilationProblem& prob, const ControlVector& v) {
  require_control(prob, v);
  const int n = prob.state_dim();
  Evaluation out;
  out.trajectory = propagate(prob.spec, control_to_state(prob, v), prob.n_steps);
  out.residual.resize(prob.residual_dim());
  out.residual.head(n) = v;
  const double inv_sigma_o = 1.0 / prob.sigma_o();
  int offset = n;
  for (const ObsEntry& entry : prob.obs.entries) {
    Vector predicted = select_components(out.trajectory.states[entry.step], entry.components);
    out.residual.segment(offset, predicted.size()) = inv_sigma_o * (entry.values - predicted);
    offset += static_cast<int>(predicted.size());
  }
  if (!out.residual.allFinite()) throw NonFiniteStateError(prob.n_steps);
  out.cost = 0.5 * out.residual.squaredNorm();
  return out;
}

Vector residual(const AssimilationProblem& prob, const ControlVector& v) {
  return evaluate(prob, v).residual;
}

double cost(const AssimilationProblem& prob, const ControlVector& v) {
  return evaluate(prob, v).cost;
}

Matrix jacobian(const AssimilationProblem& prob, const Trajectory& traj) {
  const int n = prob.state_dim();
  Matrix j(prob.residual_dim(), n);
  j.topRows(n) = Matrix::Identity(n, n);
  const double scale = -prob.sigma_b() / prob.sigma_o();
  std::vector<Matrix> blocks = obs_tlm_blocks(prob, traj);
  int offset = n;
  for (const Matrix& block : blocks) {
    j.middleRows(offset, block.rows()) = scale * block;
    offset += static_cast<int>(block.rows());
  }
  if (!j.allFinite()) throw NonFiniteStateError(prob.n_steps);
  return j;
}

Matrix jacobian(const AssimilationProblem& prob, const ControlVector& v) {
  return jacobian(prob, evaluate(prob, v).trajectory);
}

Vector gradient(const AssimilationProblem& prob, const ControlVector& v) {
  Evaluation eval = evaluate(prob, v);
  return jacobian(prob, eval.trajectory).transpose() * eval.residual;
}

Matrix gn_hessian(const AssimilationProblem& prob, const Trajectory& traj) {
  const int n = prob.state_dim();
  Matrix s = Matrix::Identity(n, n);
  const double weight = prob.var_b / prob.obs.var_o;
  for (const Matrix& block : obs_tlm_blocks(prob, traj)) {
    s += weight * block.transpose() * block;
  }
  if (!s.allFinite()) throw NonFiniteStateError(prob.n_steps);
  return s;
}

Matrix gn_hessian(const AssimilationProblem& prob, const ControlVector& v) {
  return gn_hessian(prob, evaluate(prob, v).trajectory);
}

double condition_number(const Matrix& s) {
  if (s.rows() != s.cols()) throw std::invalid_argument("condition number of non-square matrix");
  const double asym = (s - s.transpose()).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
  if (asym > 1e-10 * scale) throw std::invalid_argument("matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> eig(s, Eigen::EigenvaluesOnly);
  const double lambda_min = eig.eigenvalues().minCoeff();
  const double lambda_max = eig.eigenvalues().maxCoeff();
  if (!(lambda_min > 0.0)) throw std::invalid_argument("matrix is not positive definite");
  return lambda_max / lambda_min;
}

}  // namespace davar
