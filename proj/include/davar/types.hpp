#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace davar {

using StateVector = Eigen::VectorXd;
using ControlVector = Eigen::VectorXd;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Thrown when a model integration produces NaN/Inf (chaotic blow-up).
/// Carries the index of the step that went non-finite.
class NonFiniteStateError : public std::runtime_error {
 public:
  explicit NonFiniteStateError(int step_index)
      : std::runtime_error("non-finite state at step " + std::to_string(step_index)),
        step_index_(step_index) {}
  int step_index() const { return step_index_; }

 private:
  int step_index_;
};

/// Invalid user-facing configuration (file schema, layout/window mismatch, ...).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Direct factorization failed on a matrix that should have been SPD.
/// Signals an upstream bug, not a user error.
class NotSpdError : public std::runtime_error {
 public:
  explicit NotSpdError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace davar
