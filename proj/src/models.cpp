#include "davar/models.hpp"

#include <utility>

#include "davar/rk.hpp"

namespace davar {

namespace {

void require_dimension(const ModelSpec& spec, const StateVector& x) {
  if (x.size() != spec.n) {
    throw std::invalid_argument("state dimension " + std::to_string(x.size()) +
                                " does not match model dimension " + std::to_string(spec.n));
  }
}

StateVector l63_rhs(const L63Params& p, const StateVector& x) {
  StateVector out(3);
  out[0] = p.sigma * (x[1] - x[0]);
  out[1] = x[0] * (p.rho - x[2]) - x[1];
  out[2] = x[0] * x[1] - p.beta * x[2];
  return out;
}

Matrix l63_rhs_jacobian(const L63Params& p, const StateVector& x) {
  Matrix j(3, 3);
  j << -p.sigma, p.sigma, 0.0,
       p.rho - x[2], -1.0, -x[0],
       x[1], x[0], -p.beta;
  return j;
}

StateVector l96_rhs(const L96Params& p, const StateVector& x) {
  const int n = static_cast<int>(x.size());
  auto wrap = [n](int j) { return ((j % n) + n) % n; };
  StateVector out(n);
  for (int j = 0; j < n; ++j) {
    out[j] = -x[wrap(j - 2)] * x[wrap(j - 1)] + x[wrap(j - 1)] * x[wrap(j + 1)] - x[j] +
             p.forcing;
  }
  return out;
}

Matrix l96_rhs_jacobian(const L96Params&, const StateVector& x) {
  const int n = static_cast<int>(x.size());
  auto wrap = [n](int j) { return ((j % n) + n) % n; };
  Matrix j = Matrix::Zero(n, n);
  for (int row = 0; row < n; ++row) {
    j(row, wrap(row - 2)) += -x[wrap(row - 1)];
    j(row, wrap(row - 1)) += x[wrap(row + 1)] - x[wrap(row - 2)];
    j(row, row) += -1.0;
    j(row, wrap(row + 1)) += x[wrap(row - 1)];
  }
  return j;
}

StateVector step_unchecked(const ModelSpec& spec, const StateVector& x) {
  auto f = [&spec](const StateVector& y) { return rhs(spec, y); };
  if (spec.kind == ModelKind::L63) {
    return spec.rk2 == Rk2Variant::Heun ? rk::heun_step(f, x, spec.dt)
                                        : rk::midpoint_step(f, x, spec.dt);
  }
  return rk::rk4_step(f, x, spec.dt);
}

}  // namespace

ModelSpec ModelSpec::lorenz63(double dt, L63Params params, Rk2Variant variant) {
  ModelSpec spec;
  spec.kind = ModelKind::L63;
  spec.n = 3;
  spec.dt = dt;
  spec.l63 = params;
  spec.rk2 = variant;
  spec.validate();
  return spec;
}

ModelSpec ModelSpec::lorenz96(int n, double dt, L96Params params) {
  ModelSpec spec;
  spec.kind = ModelKind::L96;
  spec.n = n;
  spec.dt = dt;
  spec.l96 = params;
  spec.validate();
  return spec;
}

void ModelSpec::validate() const {
  if (kind == ModelKind::L63 && n != 3) {
    throw ConfigError("L63 requires n = 3, got " + std::to_string(n));
  }
  if (kind == ModelKind::L96 && n < 4) {
    throw ConfigError("L96 requires n >= 4, got " + std::to_string(n));
  }
  if (!(dt > 0.0)) {
    throw ConfigError("time step must be positive");
  }
}

StateVector rhs(const ModelSpec& spec, const StateVector& x) {
  require_dimension(spec, x);
  return spec.kind == ModelKind::L63 ? l63_rhs(spec.l63, x) : l96_rhs(spec.l96, x);
}

Matrix rhs_jacobian(const ModelSpec& spec, const StateVector& x) {
  require_dimension(spec, x);
  return spec.kind == ModelKind::L63 ? l63_rhs_jacobian(spec.l63, x)
                                     : l96_rhs_jacobian(spec.l96, x);
}

StateVector step(const ModelSpec& spec, const StateVector& x) {
  require_dimension(spec, x);
  StateVector next = step_unchecked(spec, x);
  if (!next.allFinite()) throw NonFiniteStateError(0);
  return next;
}

Matrix step_tlm(const ModelSpec& spec, const StateVector& x) {
  require_dimension(spec, x);
  auto f = [&spec](const StateVector& y) { return rhs(spec, y); };
  auto j = [&spec](const StateVector& y) { return rhs_jacobian(spec, y); };
  Matrix m;
  if (spec.kind == ModelKind::L63) {
    m = spec.rk2 == Rk2Variant::Heun ? rk::heun_step_tlm(f, j, x, spec.dt)
                                     : rk::midpoint_step_tlm(f, j, x, spec.dt);
  } else {
    m = rk::rk4_step_tlm(f, j, x, spec.dt);
  }
  if (!m.allFinite()) throw NonFiniteStateError(0);
  return m;
}

Trajectory propagate(const ModelSpec& spec, const StateVector& x0, int n_steps) {
  require_dimension(spec, x0);
  if (n_steps < 0) throw std::invalid_argument("negative step count");
  Trajectory traj;
  traj.dt = spec.dt;
  traj.states.reserve(n_steps + 1);
  traj.states.push_back(x0);
  for (int i = 1; i <= n_steps; ++i) {
    StateVector next = step_unchecked(spec, traj.states.back());
    if (!next.allFinite()) throw NonFiniteStateError(i);
    traj.states.push_back(std::move(next));
  }
  return traj;
}

Matrix propagate_tlm(const ModelSpec& spec, const Trajectory& traj, int i) {
  if (i < 0 || i > traj.steps()) {
    throw std::out_of_range("trajectory index " + std::to_string(i) + " out of range");
  }
  Matrix m = Matrix::Identity(spec.n, spec.n);
  for (int j = 0; j < i; ++j) {
    m = step_tlm(spec, traj.states[j]) * m;
  }
  return m;
}

}  // namespace davar
