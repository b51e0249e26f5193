#pragma once

#include <Eigen/Core>

namespace davar::rk {

// Explicit Runge-Kutta one-step kernels, generic in the right-hand side so
// the same code drives the dynamical models and the linear test systems.
//
// The *_tlm variants return the exact Jacobian of the corresponding step
// map, obtained by chain rule through the stages. `jac(x)` must be the
// Jacobian of `f` at x.

template <class F>
Eigen::VectorXd heun_step(F&& f, const Eigen::VectorXd& x, double dt) {
  Eigen::VectorXd k1 = f(x);
  Eigen::VectorXd k2 = f(x + dt * k1);
  return x + 0.5 * dt * (k1 + k2);
}

template <class F>
Eigen::VectorXd midpoint_step(F&& f, const Eigen::VectorXd& x, double dt) {
  Eigen::VectorXd k1 = f(x);
  Eigen::VectorXd k2 = f(x + 0.5 * dt * k1);
  return x + dt * k2;
}

template <class F>
Eigen::VectorXd rk4_step(F&& f, const Eigen::VectorXd& x, double dt) {
  Eigen::VectorXd k1 = f(x);
  Eigen::VectorXd k2 = f(x + 0.5 * dt * k1);
  Eigen::VectorXd k3 = f(x + 0.5 * dt * k2);
  Eigen::VectorXd k4 = f(x + dt * k3);
  return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

template <class F, class J>
Eigen::MatrixXd heun_step_tlm(F&& f, J&& jac, const Eigen::VectorXd& x, double dt) {
  const auto n = x.size();
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd k1 = f(x);
  Eigen::MatrixXd j1 = jac(x);
  Eigen::MatrixXd j2 = jac(x + dt * k1);
  return eye + 0.5 * dt * (j1 + j2 * (eye + dt * j1));
}

template <class F, class J>
Eigen::MatrixXd midpoint_step_tlm(F&& f, J&& jac, const Eigen::VectorXd& x, double dt) {
  const auto n = x.size();
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd k1 = f(x);
  Eigen::MatrixXd j1 = jac(x);
  Eigen::MatrixXd j2 = jac(x + 0.5 * dt * k1);
  return eye + dt * j2 * (eye + 0.5 * dt * j1);
}

template <class F, class J>
Eigen::MatrixXd rk4_step_tlm(F&& f, J&& jac, const Eigen::VectorXd& x, double dt) {
  const auto n = x.size();
  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd k1 = f(x);
  Eigen::VectorXd k2 = f(x + 0.5 * dt * k1);
  Eigen::VectorXd k3 = f(x + 0.5 * dt * k2);
  Eigen::MatrixXd m1 = jac(x);
  Eigen::MatrixXd m2 = jac(x + 0.5 * dt * k1) * (eye + 0.5 * dt * m1);
  Eigen::MatrixXd m3 = jac(x + 0.5 * dt * k2) * (eye + 0.5 * dt * m2);
  Eigen::MatrixXd m4 = jac(x + dt * k3) * (eye + dt * m3);
  return eye + dt / 6.0 * (m1 + 2.0 * m2 + 2.0 * m3 + m4);
}

}  // namespace davar::rk
