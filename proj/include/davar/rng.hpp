#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Core>

namespace davar {

/// Named sub-streams of a realization's random draws. Keeping the streams
/// separate means e.g. changing the background variance never shifts the
/// observation noise draws.
enum class SeedStream : std::uint64_t {
  Reference = 0,
  Background = 1,
  Observation = 2,
  Check = 0xC0FFEE,
};

/// Counter-based seed derivation: (base, index, stream) -> 64-bit seed.
/// Realizations can be generated in any order, or in parallel, and still
/// see identical draws.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index, SeedStream stream);

/// Seeded generator with pinned uniform/normal algorithms so that a given
/// seed yields the same doubles everywhere (no reliance on the standard
/// library's unspecified distribution internals).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform draw in [0, 1) with 53 random bits.
  double uniform01();

  /// Standard normal via Box-Muller (pairs cached).
  double normal();

  Eigen::VectorXd uniform_vector(int n);
  Eigen::VectorXd normal_vector(int n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace davar
