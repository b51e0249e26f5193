#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "davar/assim.hpp"
#include "davar/rng.hpp"
#include "davar/solvers.hpp"
#include "davar/twin.hpp"
#include "davar/verify.hpp"

using namespace davar;

namespace {

StateVector vec3(double a, double b, double c) {
  StateVector v(3);
  v << a, b, c;
  return v;
}

// A small L63 problem with one observation pair at the end of a 1-unit
// window, built by hand so the expected structures are obvious.
AssimilationProblem small_l63_problem() {
  AssimilationProblem prob;
  prob.spec = ModelSpec::lorenz63();
  prob.n_steps = 40;
  prob.background = vec3(1.1, 0.9, 20.0);
  prob.var_b = 25.0;
  ObsEntry entry;
  entry.step = 40;
  entry.components = {0, 2};
  entry.values.resize(2);
  entry.values << -2.0, 23.5;
  prob.obs = ObservationSet::from_entries({entry}, 1.0);
  prob.validate();
  return prob;
}

AssimilationProblem no_obs_problem() {
  AssimilationProblem prob;
  prob.spec = ModelSpec::lorenz63();
  prob.n_steps = 8;
  prob.background = vec3(1.0, 1.0, 20.0);
  prob.var_b = 4.0;
  prob.obs = ObservationSet::from_entries({}, 1.0);
  prob.validate();
  return prob;
}

// Straight-line re-implementation of the residual for the small L63
// problem: plain doubles, hand-rolled Heun steps, no library calls.
std::vector<double> oracle_residual_small_l63(const AssimilationProblem& prob,
                                              const ControlVector& v) {
  const double sigma = 10.0, rho = 28.0, beta = 8.0 / 3.0, dt = 0.025;
  const double sb = std::sqrt(prob.var_b);
  double x = sb * v[0] + prob.background[0];
  double y = sb * v[1] + prob.background[1];
  double z = sb * v[2] + prob.background[2];
  for (int i = 0; i < prob.n_steps; ++i) {
    const double k1x = sigma * (y - x);
    const double k1y = x * (rho - z) - y;
    const double k1z = x * y - beta * z;
    const double px = x + dt * k1x, py = y + dt * k1y, pz = z + dt * k1z;
    const double k2x = sigma * (py - px);
    const double k2y = px * (rho - pz) - py;
    const double k2z = px * py - beta * pz;
    x += 0.5 * dt * (k1x + k2x);
    y += 0.5 * dt * (k1y + k2y);
    z += 0.5 * dt * (k1z + k2z);
  }
  const double so = std::sqrt(prob.obs.var_o);
  return {v[0], v[1], v[2], (prob.obs.entries[0].values[0] - x) / so,
          (prob.obs.entries[0].values[1] - z) / so};
}

}  // namespace

TEST_CASE("control transform") {
  const AssimilationProblem prob = small_l63_problem();

  SUBCASE("v = 0 maps to the background") {
    CHECK((control_to_state(prob, ControlVector::Zero(3)) - prob.background).norm() == 0.0);
  }
  SUBCASE("scaling along a unit direction") {
    AssimilationProblem scaled = prob;
    scaled.background = StateVector::Zero(3);
    ControlVector e1 = ControlVector::Zero(3);
    e1[0] = 1.0;
    CHECK((control_to_state(scaled, e1) - vec3(5.0, 0.0, 0.0)).norm() == 0.0);
  }
  SUBCASE("round trip is exact to machine precision") {
    Rng rng(3);
    for (int trial = 0; trial < 10; ++trial) {
      const ControlVector v = rng.normal_vector(3);
      CHECK((state_to_control(prob, control_to_state(prob, v)) - v).norm() <= 1e-15);
    }
  }
  SUBCASE("offset by sigma_b times a direction") {
    const StateVector d = vec3(0.3, -1.0, 2.0);
    const StateVector x0 = prob.background + std::sqrt(prob.var_b) * d;
    CHECK((state_to_control(prob, x0) - d).norm() <= 1e-14);
  }
}

TEST_CASE("residual and cost") {
  SUBCASE("no observations, v = 0") {
    const AssimilationProblem prob = no_obs_problem();
    const Evaluation e = evaluate(prob, ControlVector::Zero(3));
    CHECK(e.residual.norm() == 0.0);
    CHECK(e.cost == 0.0);
  }

  SUBCASE("noise-free twin at the truth control") {
    const ModelSpec spec = ModelSpec::lorenz63();
    const StateVector x_ref = make_reference(spec, 99);
    const Trajectory nature = propagate(spec, x_ref, 40);
    AssimilationProblem prob;
    prob.spec = spec;
    prob.n_steps = 40;
    prob.background = x_ref + vec3(0.5, -0.25, 1.0);
    prob.var_b = 25.0;
    ObsEntry entry;
    entry.step = 40;
    entry.components = {0, 2};
    entry.values.resize(2);
    entry.values << nature.states[40][0], nature.states[40][2];
    prob.obs = ObservationSet::from_entries({entry}, 1.0);
    prob.validate();

    const ControlVector v_truth = state_to_control(prob, x_ref);
    const Evaluation e = evaluate(prob, v_truth);
    CHECK(e.residual.tail(2).norm() <= 1e-10);
    const StateVector expected_head = (x_ref - prob.background) / std::sqrt(prob.var_b);
    CHECK((e.residual.head(3) - expected_head).norm() <= 1e-14);
    CHECK(e.cost == doctest::Approx(0.5 * expected_head.squaredNorm()).epsilon(1e-10));
  }

  SUBCASE("matches the straight-line oracle") {
    const AssimilationProblem prob = small_l63_problem();
    Rng rng(17);
    for (int trial = 0; trial < 5; ++trial) {
      const ControlVector v = 0.5 * rng.normal_vector(3);
      const Evaluation e = evaluate(prob, v);
      const std::vector<double> oracle = oracle_residual_small_l63(prob, v);
      REQUIRE(e.residual.size() == 5);
      double sum_sq = 0.0;
      for (int i = 0; i < 5; ++i) {
        CHECK(e.residual[i] == doctest::Approx(oracle[i]).epsilon(1e-12));
        sum_sq += oracle[i] * oracle[i];
      }
      CHECK(e.cost == doctest::Approx(0.5 * sum_sq).epsilon(1e-12));
    }
  }

  SUBCASE("blocks are ordered by increasing step regardless of entry order") {
    const ModelSpec spec = ModelSpec::lorenz63();
    Rng rng(5);
    AssimilationProblem prob;
    prob.spec = spec;
    prob.n_steps = 8;
    prob.background = vec3(0.2, 1.4, 22.0);
    prob.var_b = 1.0;
    ObsEntry first{.step = 4, .components = {1}, .values = Vector::Constant(1, 3.0)};
    ObsEntry second{.step = 8, .components = {0, 2}, .values = Vector::Zero(2)};
    prob.obs = ObservationSet::from_entries({second, first}, 1.0);
    prob.validate();
    AssimilationProblem reordered = prob;
    reordered.obs = ObservationSet::from_entries({first, second}, 1.0);
    reordered.validate();
    const ControlVector v = rng.normal_vector(3);
    CHECK(cost(prob, v) == cost(reordered, v));
    CHECK((residual(prob, v) - residual(reordered, v)).norm() == 0.0);
  }

  SUBCASE("non-finite trajectories surface as NonFiniteStateError") {
    AssimilationProblem prob = small_l63_problem();
    prob.background = vec3(1e160, 1e160, 1e160);
    CHECK_THROWS_AS(evaluate(prob, ControlVector::Zero(3)), NonFiniteStateError);
  }
}

TEST_CASE("jacobian") {
  SUBCASE("no observations gives the identity") {
    const AssimilationProblem prob = no_obs_problem();
    const Matrix j = jacobian(prob, ControlVector::Zero(3));
    CHECK((j - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("observation at step 0 selects scaled identity rows") {
    AssimilationProblem prob = no_obs_problem();
    ObsEntry entry{.step = 0, .components = {2, 0}, .values = Vector::Zero(2)};
    prob.obs = ObservationSet::from_entries({entry}, 4.0);
    prob.validate();
    const Matrix j = jacobian(prob, ControlVector::Zero(3));
    const double scale = -std::sqrt(prob.var_b) / 2.0;
    Matrix expected = Matrix::Zero(2, 3);
    expected(0, 2) = scale;
    expected(1, 0) = scale;
    CHECK((j.bottomRows(2) - expected).cwiseAbs().maxCoeff() <= 1e-15);
  }

  SUBCASE("finite-difference columns") {
    const AssimilationProblem prob = small_l63_problem();
    Rng rng(29);
    for (int trial = 0; trial < 5; ++trial) {
      const ControlVector v = 0.5 * rng.normal_vector(3);
      CHECK(fd_jacobian_rel_error(prob, v, 1e-6) <= 1e-5);
    }
  }
}

TEST_CASE("gradient") {
  SUBCASE("no observations: gradient equals v") {
    const AssimilationProblem prob = no_obs_problem();
    Rng rng(31);
    const ControlVector v = rng.normal_vector(3);
    CHECK((gradient(prob, v) - v).norm() <= 1e-15);
  }

  SUBCASE("zero residual problem has zero gradient at the minimum") {
    const ModelSpec spec = ModelSpec::lorenz63();
    const StateVector x_ref = make_reference(spec, 7);
    const Trajectory nature = propagate(spec, x_ref, 20);
    AssimilationProblem prob;
    prob.spec = spec;
    prob.n_steps = 20;
    prob.background = x_ref;  // zero background error
    prob.var_b = 25.0;
    ObsEntry entry;
    entry.step = 20;
    entry.components = {0, 2};
    entry.values.resize(2);
    entry.values << nature.states[20][0], nature.states[20][2];
    prob.obs = ObservationSet::from_entries({entry}, 1.0);
    CHECK(gradient(prob, ControlVector::Zero(3)).norm() <= 1e-12);
  }

  SUBCASE("consistency of the two code paths") {
    const AssimilationProblem prob = small_l63_problem();
    Rng rng(37);
    for (int trial = 0; trial < 5; ++trial) {
      const ControlVector v = rng.normal_vector(3);
      const Vector direct = gradient(prob, v);
      const Vector assembled = jacobian(prob, v).transpose() * residual(prob, v);
      CHECK((direct - assembled).cwiseAbs().maxCoeff() <= 1e-12);
    }
  }

  SUBCASE("central finite differences of the cost") {
    Rng rng(41);
    const AssimilationProblem l63 = small_l63_problem();
    for (int trial = 0; trial < 5; ++trial) {
      CHECK(fd_gradient_rel_error(l63, 0.5 * rng.normal_vector(3), 1e-6) <= 1e-6);
    }
  }
}

TEST_CASE("gauss-newton hessian") {
  const AssimilationProblem prob = small_l63_problem();
  Rng rng(43);

  SUBCASE("no observations gives the identity") {
    const AssimilationProblem empty = no_obs_problem();
    CHECK((gn_hessian(empty, ControlVector::Zero(3)) - Matrix::Identity(3, 3))
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }
  SUBCASE("symmetric and equal to the explicit J^T J product") {
    for (int trial = 0; trial < 5; ++trial) {
      const ControlVector v = rng.normal_vector(3);
      const Matrix s = gn_hessian(prob, v);
      CHECK((s - s.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
      const Matrix j = jacobian(prob, v);
      const Matrix product = j.transpose() * j;
      const double scale = std::max(1.0, product.cwiseAbs().maxCoeff());
      CHECK((s - product).cwiseAbs().maxCoeff() <= 1e-12 * scale);
    }
  }
  SUBCASE("eigenvalues stay at or above one") {
    TwinConfig cfg;
    cfg.spec = ModelSpec::lorenz96();
    cfg.var_b = 6.25;
    cfg.var_o = 0.25;
    cfg.layout = ObsLayout::Nobs2;
    cfg.base_seed = 321;
    for (int i = 0; i < 10; ++i) {
      const CheckProblem cp = make_check_problem(cfg, i);
      CHECK(min_gn_hessian_eigenvalue(cp.problem, cp.v) >= 1.0 - 1e-10);
    }
  }
  SUBCASE("smallest singular value of J stays at or above one") {
    for (int trial = 0; trial < 3; ++trial) {
      const ControlVector v = rng.normal_vector(3);
      Eigen::JacobiSVD<Matrix> svd(jacobian(prob, v));
      CHECK(svd.singularValues().minCoeff() >= 1.0 - 1e-10);
    }
  }
}

TEST_CASE("gauss-newton step is a descent direction") {
  const AssimilationProblem prob = small_l63_problem();
  Rng rng(47);
  for (int trial = 0; trial < 10; ++trial) {
    const ControlVector v = rng.normal_vector(3);
    const Vector g = gradient(prob, v);
    if (g.norm() == 0.0) continue;
    const Vector s = spd_solve(gn_hessian(prob, v), -g);
    CHECK(g.dot(s) < 0.0);
  }
}

TEST_CASE("background variance scaling follows the explicit formula") {
  const AssimilationProblem prob = small_l63_problem();
  AssimilationProblem wider = prob;
  wider.var_b = 4.0 * prob.var_b;

  const StateVector x0 = prob.background + vec3(0.8, -1.3, 2.1);
  const double j_narrow = cost(prob, state_to_control(prob, x0));
  const double j_wide = cost(wider, state_to_control(wider, x0));
  const double bg_narrow = 0.5 * (x0 - prob.background).squaredNorm() / prob.var_b;
  // Same x0: the observation term is untouched, the background term scales
  // by 1/4 when sigma_b doubles.
  CHECK(j_wide == doctest::Approx(j_narrow - bg_narrow + 0.25 * bg_narrow).epsilon(1e-12));
}

TEST_CASE("condition number") {
  SUBCASE("identity") { CHECK(condition_number(Matrix::Identity(5, 5)) == 1.0); }
  SUBCASE("diagonal") {
    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = 4.0;
    CHECK(condition_number(d) == doctest::Approx(4.0).epsilon(1e-14));
  }
  SUBCASE("constructed spectrum") {
    Rng rng(53);
    Matrix base(6, 6);
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j) base(i, j) = rng.normal();
    const Matrix q = Eigen::HouseholderQR<Matrix>(base).householderQ();
    Vector d(6);
    d << 0.5, 1.0, 2.5, 7.0, 11.0, 40.0;
    const Matrix s = q * d.asDiagonal() * q.transpose();
    CHECK(condition_number(s) == doctest::Approx(80.0).epsilon(1e-10));
  }
  SUBCASE("rejects non-symmetric input") {
    Matrix bad = Matrix::Identity(3, 3);
    bad(0, 2) = 0.5;
    CHECK_THROWS_AS(condition_number(bad), std::invalid_argument);
  }
}

TEST_CASE("observation set validation") {
  SUBCASE("duplicate steps rejected") {
    ObsEntry a{.step = 4, .components = {0}, .values = Vector::Zero(1)};
    ObsEntry b{.step = 4, .components = {1}, .values = Vector::Zero(1)};
    const ObservationSet set = ObservationSet::from_entries({a, b}, 1.0);
    CHECK_THROWS_AS(set.validate(3, 8), ConfigError);
  }
  SUBCASE("component out of range") {
    ObsEntry a{.step = 2, .components = {3}, .values = Vector::Zero(1)};
    CHECK_THROWS_AS(ObservationSet::from_entries({a}, 1.0).validate(3, 8), ConfigError);
  }
  SUBCASE("duplicate components") {
    ObsEntry a{.step = 2, .components = {1, 1}, .values = Vector::Zero(2)};
    CHECK_THROWS_AS(ObservationSet::from_entries({a}, 1.0).validate(3, 8), ConfigError);
  }
  SUBCASE("step beyond the window") {
    ObsEntry a{.step = 9, .components = {0}, .values = Vector::Zero(1)};
    CHECK_THROWS_AS(ObservationSet::from_entries({a}, 1.0).validate(3, 8), ConfigError);
  }
  SUBCASE("non-positive variance") {
    CHECK_THROWS_AS(ObservationSet::from_entries({}, 0.0).validate(3, 8), ConfigError);
  }
}
