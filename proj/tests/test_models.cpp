#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "davar/models.hpp"
#include "davar/rk.hpp"
#include "davar/rng.hpp"
#include "davar/verify.hpp"

using namespace davar;

namespace {

StateVector vec3(double a, double b, double c) {
  StateVector v(3);
  v << a, b, c;
  return v;
}

// Matrix polynomial I + (dt A) + (dt A)^2/2! + ... + (dt A)^q/q!.
Matrix rk_polynomial(const Matrix& a, double dt, int order) {
  Matrix result = Matrix::Identity(a.rows(), a.cols());
  Matrix term = Matrix::Identity(a.rows(), a.cols());
  for (int q = 1; q <= order; ++q) {
    term = (dt / q) * (a * term);
    result += term;
  }
  return result;
}

}  // namespace

TEST_CASE("L63 right-hand side") {
  const ModelSpec spec = ModelSpec::lorenz63();

  SUBCASE("origin is a fixed point") {
    CHECK(rhs(spec, vec3(0, 0, 0)).norm() == 0.0);
  }
  SUBCASE("value at (1,1,1)") {
    const StateVector f = rhs(spec, vec3(1, 1, 1));
    CHECK(f[0] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(f[1] == doctest::Approx(26.0).epsilon(1e-15));
    CHECK(f[2] == doctest::Approx(-5.0 / 3.0).epsilon(1e-15));
  }
  SUBCASE("dimension mismatch rejected") {
    CHECK_THROWS_AS(rhs(spec, StateVector::Zero(4)), std::invalid_argument);
  }
}

TEST_CASE("L96 right-hand side") {
  SUBCASE("equilibrium at F") {
    const ModelSpec spec = ModelSpec::lorenz96();
    const StateVector x = StateVector::Constant(40, 8.0);
    CHECK(rhs(spec, x).norm() == 0.0);
  }
  SUBCASE("frozen value, n = 5") {
    const ModelSpec spec = ModelSpec::lorenz96(5);
    StateVector x(5);
    x << 1, 2, 3, 4, 5;
    const StateVector f = rhs(spec, x);
    CHECK(f[0] == doctest::Approx(-3.0).epsilon(1e-15));
    CHECK(f[1] == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(f[2] == doctest::Approx(11.0).epsilon(1e-15));
    CHECK(f[3] == doctest::Approx(13.0).epsilon(1e-15));
    CHECK(f[4] == doctest::Approx(-5.0).epsilon(1e-15));
  }
}

TEST_CASE("analytic rhs Jacobians") {
  SUBCASE("L63 at the origin") {
    const ModelSpec spec = ModelSpec::lorenz63();
    const Matrix j = rhs_jacobian(spec, vec3(0, 0, 0));
    Matrix expected(3, 3);
    expected << -10.0, 10.0, 0.0, 28.0, -1.0, 0.0, 0.0, 0.0, -8.0 / 3.0;
    CHECK((j - expected).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("L96 at the equilibrium is circulant") {
    const ModelSpec spec = ModelSpec::lorenz96();
    const double f = spec.l96.forcing;
    const StateVector x = StateVector::Constant(40, f);
    const Matrix j = rhs_jacobian(spec, x);
    for (int row = 0; row < 40; ++row) {
      for (int col = 0; col < 40; ++col) {
        const int offset = ((col - row) % 40 + 40) % 40;
        double expected = 0.0;
        if (offset == 0) expected = -1.0;
        if (offset == 1) expected = f;
        if (offset == 38) expected = -f;  // the j-2 column
        CHECK(j(row, col) == doctest::Approx(expected).epsilon(1e-15));
      }
    }
  }

  SUBCASE("L96 rows have exactly 4 structural nonzeros for n >= 5") {
    for (int n : {5, 7, 40}) {
      const ModelSpec spec = ModelSpec::lorenz96(n);
      Rng rng(7);
      const StateVector x = rng.normal_vector(n) * 3.0 + StateVector::Constant(n, 1.0);
      const Matrix j = rhs_jacobian(spec, x);
      for (int row = 0; row < n; ++row) {
        int nonzeros = 0;
        for (int col = 0; col < n; ++col) {
          if (j(row, col) != 0.0) ++nonzeros;
        }
        CHECK(nonzeros == 4);
      }
    }
  }

  SUBCASE("directional finite differences, both models") {
    const double h = 1e-6;
    for (const ModelSpec& spec : {ModelSpec::lorenz63(), ModelSpec::lorenz96()}) {
      Rng rng(derive_seed(11, spec.n, SeedStream::Check));
      for (int trial = 0; trial < 20; ++trial) {
        const StateVector x = 5.0 * rng.normal_vector(spec.n);
        StateVector d = rng.normal_vector(spec.n);
        d.normalize();
        const StateVector fd = (rhs(spec, x + h * d) - rhs(spec, x - h * d)) / (2.0 * h);
        const StateVector jd = rhs_jacobian(spec, x) * d;
        CHECK((fd - jd).norm() <= 1e-6 * std::max(1.0, jd.norm()));
      }
    }
  }
}

TEST_CASE("one-step integrators against the scripted oracle") {
  SUBCASE("L63 Heun at (1,1,1)") {
    const ModelSpec spec = ModelSpec::lorenz63();
    const StateVector next = step(spec, vec3(1, 1, 1));
    CHECK(next[0] == doctest::Approx(1.08125).epsilon(1e-14));
    CHECK(next[1] == doctest::Approx(1.6423958333333335).epsilon(1e-14));
    CHECK(next[2] == doctest::Approx(0.9678472222222222).epsilon(1e-14));
  }
  SUBCASE("L63 Heun at (1,2,3)") {
    const ModelSpec spec = ModelSpec::lorenz63();
    const StateVector next = step(spec, vec3(1, 2, 3));
    CHECK(next[0] == doctest::Approx(1.290625).epsilon(1e-14));
    CHECK(next[1] == doctest::Approx(2.64828125).epsilon(1e-14));
    CHECK(next[2] == doctest::Approx(2.870234375).epsilon(1e-14));
  }
  SUBCASE("L63 midpoint variant at (1,2,3)") {
    const ModelSpec spec = ModelSpec::lorenz63(0.025, {}, Rk2Variant::Midpoint);
    const StateVector next = step(spec, vec3(1, 2, 3));
    CHECK(next[0] == doctest::Approx(1.290625).epsilon(1e-14));
    CHECK(next[1] == doctest::Approx(2.648046875).epsilon(1e-14));
    CHECK(next[2] == doctest::Approx(2.8693359375).epsilon(1e-14));
  }
  SUBCASE("L96 RK4, n = 5") {
    const ModelSpec spec = ModelSpec::lorenz96(5);
    StateVector x(5);
    x << 1, 2, 3, 4, 5;
    const StateVector next = step(spec, x);
    CHECK(next[0] == doctest::Approx(0.9161185573744279).epsilon(1e-14));
    CHECK(next[1] == doctest::Approx(2.1057375516934487).epsilon(1e-14));
    CHECK(next[2] == doctest::Approx(3.285822068594099).epsilon(1e-14));
    CHECK(next[3] == doctest::Approx(4.321747463578465).epsilon(1e-14));
    CHECK(next[4] == doctest::Approx(4.849552382487491).epsilon(1e-14));
  }
  SUBCASE("zero right-hand side leaves the state unchanged") {
    const ModelSpec spec = ModelSpec::lorenz96();
    const StateVector x = StateVector::Constant(40, 8.0);
    CHECK((step(spec, x) - x).norm() == 0.0);
  }
}

TEST_CASE("linear systems reduce the RK kernels to matrix polynomials") {
  Matrix a(3, 3);
  a << 0.3, -1.2, 0.4, 0.9, 0.1, -0.5, -0.2, 0.6, 0.05;
  const double dt = 0.025;
  auto f = [&a](const StateVector& x) -> StateVector { return a * x; };
  auto jac = [&a](const StateVector&) -> Matrix { return a; };
  StateVector x0(3);
  x0 << 1.0, -2.0, 0.5;

  SUBCASE("step values") {
    CHECK((rk::heun_step(f, x0, dt) - rk_polynomial(a, dt, 2) * x0).norm() <= 1e-14);
    CHECK((rk::midpoint_step(f, x0, dt) - rk_polynomial(a, dt, 2) * x0).norm() <= 1e-14);
    CHECK((rk::rk4_step(f, x0, dt) - rk_polynomial(a, dt, 4) * x0).norm() <= 1e-14);
  }
  SUBCASE("tangent linear maps are x-independent polynomials") {
    CHECK((rk::heun_step_tlm(f, jac, x0, dt) - rk_polynomial(a, dt, 2)).cwiseAbs().maxCoeff() <=
          1e-14);
    CHECK((rk::midpoint_step_tlm(f, jac, x0, dt) - rk_polynomial(a, dt, 2))
              .cwiseAbs()
              .maxCoeff() <= 1e-14);
    CHECK((rk::rk4_step_tlm(f, jac, x0, dt) - rk_polynomial(a, dt, 4)).cwiseAbs().maxCoeff() <=
          1e-14);
  }
}

TEST_CASE("step_tlm at the L96 equilibrium equals the RK4 polynomial") {
  const ModelSpec spec = ModelSpec::lorenz96();
  const StateVector x = StateVector::Constant(40, spec.l96.forcing);
  const Matrix polynomial = rk_polynomial(rhs_jacobian(spec, x), spec.dt, 4);
  CHECK((step_tlm(spec, x) - polynomial).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("Taylor remainder test for the tangent linear step") {
  for (const ModelSpec& spec :
       {ModelSpec::lorenz63(), ModelSpec::lorenz63(0.025, {}, Rk2Variant::Midpoint),
        ModelSpec::lorenz96()}) {
    Rng rng(derive_seed(23, spec.n, SeedStream::Check));
    const StateVector x = 5.0 * rng.normal_vector(spec.n);
    StateVector d = rng.normal_vector(spec.n);
    d.normalize();
    const TaylorTest taylor = tlm_taylor_test(spec, x, d);
    REQUIRE(taylor.ratios.size() >= 4);
    for (double ratio : taylor.ratios) {
      CHECK(ratio >= 1.8);
      CHECK(ratio <= 2.2);
    }
  }
}

TEST_CASE("a corrupted tangent linear model fails the Taylor test") {
  const ModelSpec spec = ModelSpec::lorenz63();
  Rng rng(37);
  const StateVector x = 5.0 * rng.normal_vector(3);
  StateVector d = rng.normal_vector(3);
  d.normalize();
  // Euler linearization instead of the Heun chain rule: first order only.
  auto corrupted = [&spec](const StateVector& y) -> Matrix {
    return Matrix::Identity(3, 3) + spec.dt * rhs_jacobian(spec, y);
  };
  const TaylorTest taylor =
      taylor_test([&spec](const StateVector& y) { return step(spec, y); }, corrupted, x, d);
  REQUIRE(!taylor.ratios.empty());
  // The remainder stalls at the TLM defect, so the tail ratio collapses to 1.
  CHECK(taylor.ratios.back() < 1.8);
}

TEST_CASE("propagate") {
  const ModelSpec spec = ModelSpec::lorenz63();
  const StateVector x0 = vec3(1.0, 1.0, 1.0);

  SUBCASE("zero steps") {
    const Trajectory traj = propagate(spec, x0, 0);
    CHECK(traj.steps() == 0);
    CHECK((traj.states[0] - x0).norm() == 0.0);
  }
  SUBCASE("constant trajectory at the L96 equilibrium") {
    const ModelSpec l96 = ModelSpec::lorenz96();
    const StateVector eq = StateVector::Constant(40, 8.0);
    const Trajectory traj = propagate(l96, eq, 17);
    for (const StateVector& s : traj.states) CHECK((s - eq).norm() == 0.0);
  }
  SUBCASE("composition is exact") {
    const Trajectory whole = propagate(spec, x0, 13);
    const Trajectory head = propagate(spec, x0, 5);
    const Trajectory tail = propagate(spec, head.states[5], 8);
    CHECK((whole.states[13] - tail.states[8]).norm() == 0.0);
  }
  SUBCASE("bit-identical reruns") {
    const Trajectory a = propagate(spec, x0, 40);
    const Trajectory b = propagate(spec, x0, 40);
    for (int i = 0; i <= 40; ++i) CHECK((a.states[i] - b.states[i]).norm() == 0.0);
  }
  SUBCASE("blow-up reports the failing step") {
    const ModelSpec l96 = ModelSpec::lorenz96();
    const StateVector huge = StateVector::Constant(40, 1e200);
    try {
      propagate(l96, huge, 10);
      FAIL("expected NonFiniteStateError");
    } catch (const NonFiniteStateError& e) {
      CHECK(e.step_index() >= 1);
    }
  }
}

TEST_CASE("propagate_tlm") {
  const ModelSpec spec = ModelSpec::lorenz63();
  const Trajectory traj = propagate(spec, vec3(1.2, -0.7, 21.0), 10);

  SUBCASE("identity at step 0") {
    CHECK((propagate_tlm(spec, traj, 0) - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);
  }
  SUBCASE("single factor at step 1") {
    CHECK((propagate_tlm(spec, traj, 1) - step_tlm(spec, traj.states[0])).cwiseAbs().maxCoeff() ==
          0.0);
  }
  SUBCASE("factors compose") {
    for (int i = 0; i < 10; ++i) {
      const Matrix left = propagate_tlm(spec, traj, i + 1);
      const Matrix right = step_tlm(spec, traj.states[i]) * propagate_tlm(spec, traj, i);
      CHECK((left - right).cwiseAbs().maxCoeff() == 0.0);
    }
  }
  SUBCASE("index out of range") {
    CHECK_THROWS_AS(propagate_tlm(spec, traj, 11), std::out_of_range);
    CHECK_THROWS_AS(propagate_tlm(spec, traj, -1), std::out_of_range);
  }
  SUBCASE("full-window directional finite difference") {
    const int window = 40;
    for (const ModelSpec& model : {ModelSpec::lorenz63(), ModelSpec::lorenz96()}) {
      Rng rng(derive_seed(41, model.n, SeedStream::Check));
      StateVector x0 = model.kind == ModelKind::L63
                           ? vec3(1.2, -0.7, 21.0)
                           : StateVector(8.0 * rng.uniform_vector(model.n));
      StateVector d = rng.normal_vector(model.n);
      d.normalize();
      const Trajectory base = propagate(model, x0, window);
      const Matrix m = propagate_tlm(model, base, window);
      const double eps = 1e-6;
      const Trajectory shifted = propagate(model, x0 + eps * d, window);
      const StateVector fd = (shifted.states[window] - base.states[window]) / eps;
      const StateVector md = m * d;
      CHECK((fd - md).norm() <= 1e-4 * std::max(1.0, md.norm()));
    }
  }
}

TEST_CASE("model spec validation") {
  CHECK_THROWS_AS(ModelSpec::lorenz96(3), ConfigError);
  ModelSpec bad = ModelSpec::lorenz63();
  bad.n = 4;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = ModelSpec::lorenz63();
  bad.dt = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}
