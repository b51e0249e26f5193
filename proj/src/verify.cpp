#include "davar/verify.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace davar {

namespace {

constexpr double kEpsMach = std::numeric_limits<double>::epsilon();

double rel_norm_error(const Vector& approx, const Vector& exact) {
  const double scale = std::max(exact.norm(), 1e-300);
  return (approx - exact).norm() / scale;
}

}  // namespace

double fd_gradient_rel_error(const AssimilationProblem& prob, const ControlVector& v, double h) {
  const Vector grad = gradient(prob, v);
  Vector fd(grad.size());
  for (int j = 0; j < grad.size(); ++j) {
    ControlVector plus = v;
    ControlVector minus = v;
    plus[j] += h;
    minus[j] -= h;
    fd[j] = (cost(prob, plus) - cost(prob, minus)) / (2.0 * h);
  }
  return rel_norm_error(fd, grad);
}

double fd_jacobian_rel_error(const AssimilationProblem& prob, const ControlVector& v, double h) {
  const Matrix jac = jacobian(prob, v);
  double worst = 0.0;
  for (int j = 0; j < jac.cols(); ++j) {
    ControlVector plus = v;
    ControlVector minus = v;
    plus[j] += h;
    minus[j] -= h;
    const Vector fd_col = (residual(prob, plus) - residual(prob, minus)) / (2.0 * h);
    worst = std::max(worst, rel_norm_error(fd_col, jac.col(j)));
  }
  return worst;
}

TaylorTest taylor_test(const std::function<StateVector(const StateVector&)>& map,
                       const std::function<Matrix(const StateVector&)>& map_jacobian,
                       const StateVector& x, const StateVector& direction, double eps0,
                       int halvings) {
  TaylorTest result;
  const StateVector base = map(x);
  const Matrix jac = map_jacobian(x);
  const StateVector jac_dir = jac * direction;
  const double dir_norm = direction.norm();

  std::vector<double> noise;
  double eps = eps0;
  for (int i = 0; i <= halvings; ++i, eps *= 0.5) {
    const StateVector perturbed = map(x + eps * direction);
    const double remainder = (perturbed - base - eps * jac_dir).norm() / (eps * dir_norm);
    result.epsilons.push_back(eps);
    result.remainders.push_back(remainder);
    // Cancellation in (map(x+eps d) - map(x)) leaves O(eps_mach |map|) noise.
    noise.push_back(64.0 * kEpsMach * std::max(base.norm(), 1.0) / (eps * dir_norm));
  }
  for (std::size_t i = 0; i + 1 < result.remainders.size(); ++i) {
    const bool trusted = result.remainders[i] > 100.0 * noise[i] &&
                         result.remainders[i + 1] > 100.0 * noise[i + 1];
    if (trusted) result.ratios.push_back(result.remainders[i] / result.remainders[i + 1]);
  }
  return result;
}

TaylorTest tlm_taylor_test(const ModelSpec& spec, const StateVector& x,
                           const StateVector& direction) {
  return taylor_test([&spec](const StateVector& y) { return step(spec, y); },
                     [&spec](const StateVector& y) { return step_tlm(spec, y); }, x, direction);
}

double min_gn_hessian_eigenvalue(const AssimilationProblem& prob, const ControlVector& v) {
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gn_hessian(prob, v), Eigen::EigenvaluesOnly);
  return eig.eigenvalues().minCoeff();
}

CheckProblem make_check_problem(const TwinConfig& cfg, int index) {
  CheckProblem check;
  check.problem = make_problem(cfg, make_realization(cfg, index));
  Rng rng(derive_seed(cfg.base_seed, static_cast<std::uint64_t>(index), SeedStream::Check));
  check.v = rng.normal_vector(check.problem.state_dim());
  return check;
}

std::vector<CheckResult> run_verification(const ExperimentConfig& config, int n_problems) {
  const TwinConfig& twin = config.twin;
  std::vector<CheckResult> results;

  {
    CheckResult check{.name = "fd_gradient", .tolerance = 1e-6};
    for (int i = 0; i < n_problems; ++i) {
      const CheckProblem cp = make_check_problem(twin, i);
      check.measured = std::max(check.measured, fd_gradient_rel_error(cp.problem, cp.v, 1e-6));
    }
    check.pass = check.measured <= check.tolerance;
    check.detail = "max relative gradient error over random problems";
    results.push_back(check);
  }

  {
    CheckResult check{.name = "fd_jacobian", .tolerance = 1e-5};
    for (int i = 0; i < n_problems; ++i) {
      const CheckProblem cp = make_check_problem(twin, i);
      check.measured = std::max(check.measured, fd_jacobian_rel_error(cp.problem, cp.v, 1e-6));
    }
    check.pass = check.measured <= check.tolerance;
    check.detail = "max relative Jacobian column error over random problems";
    results.push_back(check);
  }

  {
    CheckResult check{.name = "tlm_taylor", .tolerance = 0.2};
    int ratios_seen = 0;
    for (int i = 0; i < n_problems; ++i) {
      const CheckProblem cp = make_check_problem(twin, i);
      Rng rng(derive_seed(twin.base_seed, 1000 + i, SeedStream::Check));
      StateVector direction = rng.normal_vector(twin.spec.n);
      direction.normalize();
      const TaylorTest taylor =
          tlm_taylor_test(twin.spec, cp.problem.background, direction);
      for (double ratio : taylor.ratios) {
        check.measured = std::max(check.measured, std::abs(ratio - 2.0));
        ++ratios_seen;
      }
    }
    check.pass = check.measured <= check.tolerance && ratios_seen >= n_problems;
    check.detail = "max |ratio - 2| over " + std::to_string(ratios_seen) + " Taylor ratios";
    results.push_back(check);
  }

  {
    CheckResult check{.name = "hessian_min_eigenvalue",
                      .measured = std::numeric_limits<double>::infinity(),
                      .tolerance = 1.0 - 1e-10};
    for (int i = 0; i < n_problems; ++i) {
      const CheckProblem cp = make_check_problem(twin, i);
      check.measured = std::min(check.measured, min_gn_hessian_eigenvalue(cp.problem, cp.v));
    }
    check.pass = check.measured >= check.tolerance;
    check.detail = "min eigenvalue of the GN Hessian (must stay >= 1)";
    results.push_back(check);
  }

  {
    // Observation at step 0 makes the residual affine, so one GN iteration
    // must land on the normal-equations solution.
    CheckResult check{.name = "affine_one_iteration", .tolerance = 1e-8};
    const CheckProblem cp = make_check_problem(twin, 0);
    AssimilationProblem prob = cp.problem;
    const std::vector<int> comps = twin.resolved_components();
    ObsEntry entry;
    entry.step = 0;
    entry.components = comps;
    entry.values.resize(comps.size());
    for (std::size_t a = 0; a < comps.size(); ++a) {
      entry.values[a] = prob.background[comps[a]] + 0.5 * static_cast<double>(a + 1);
    }
    prob.obs = ObservationSet::from_entries({entry}, twin.var_o);
    prob.validate();

    const int n = prob.state_dim();
    const int p = prob.obs_dim();
    Matrix selector = Matrix::Zero(p, n);
    for (int a = 0; a < p; ++a) selector(a, comps[a]) = 1.0;
    const Matrix d = (prob.sigma_b() / prob.sigma_o()) * selector;
    const Vector c = (entry.values - selector * prob.background) / prob.sigma_o();
    const Vector v_star =
        spd_solve(Matrix::Identity(n, n) + d.transpose() * d, d.transpose() * c);

    const Vector s0 = spd_solve(gn_hessian(prob, cp.v), -gradient(prob, cp.v));
    check.measured = (cp.v + s0 - v_star).norm();
    check.pass = check.measured <= check.tolerance;
    check.detail = "distance of the first GN iterate from the normal-equations solution";
    results.push_back(check);
  }

  {
    CheckResult check{.name = "safeguard_audits", .tolerance = 0.0};
    int violations = 0;
    bool budget_ok = true;
    for (int i = 0; i < n_problems; ++i) {
      const CheckProblem cp = make_check_problem(twin, i);
      const ControlVector v0 = ControlVector::Zero(cp.problem.state_dim());
      for (Method m : {Method::GN, Method::LS, Method::REG}) {
        SolverOptions opts = twin.solver;
        opts.method = m;
        const SolverTrace trace = solve(cp.problem, v0, opts);
        const TraceAudit audit = audit_trace(trace, opts);
        violations += audit.armijo_violations + audit.rho_violations +
                      audit.monotonicity_violations + audit.gamma_update_violations;
        budget_ok = budget_ok && audit.budget_ok && audit.counts_ok;
      }
    }
    check.measured = static_cast<double>(violations);
    check.pass = violations == 0 && budget_ok;
    check.detail = "Armijo/rho/monotonicity/budget contract violations across solver traces";
    results.push_back(check);
  }

  return results;
}

}  // namespace davar
