#include "smid/levenberg_marquardt.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Cholesky>

namespace smid {

std::string_view to_string(LmTermination t) {
  switch (t) {
    case LmTermination::GradientSmall: return "gradient_small";
    case LmTermination::CostStalled: return "cost_stalled";
    case LmTermination::StepSmall: return "step_small";
    case LmTermination::MaxIterations: return "max_iterations";
    case LmTermination::DampingExhausted: return "damping_exhausted";
  }
  return "unknown";
}

LmSummary levenberg_marquardt(LeastSquaresProblem& problem, const Eigen::VectorXd& x0,
                              const LmOptions& opt) {
  const int n = problem.num_params();
  const int m = problem.num_residuals();

  LmSummary s;
  s.x = x0;
  Eigen::VectorXd r(m), r_new(m);
  problem.residual(s.x, r);
  double cost = 0.5 * r.squaredNorm();
  if (!std::isfinite(cost)) throw Error(ErrorCode::SolverDiverged, "non-finite initial cost");
  s.initial_cost = cost;

  Eigen::VectorXd lower(n);
  bool bounded = false;
  for (int j = 0; j < n; ++j) {
    lower[j] = problem.lower_bound(j);
    bounded = bounded || std::isfinite(lower[j]);
    if (s.x[j] < lower[j]) s.x[j] = lower[j];
  }
  if (bounded) {
    problem.residual(s.x, r);
    cost = 0.5 * r.squaredNorm();
    s.initial_cost = cost;
  }

  Eigen::MatrixXd J;
  Eigen::MatrixXd A(n, n);
  Eigen::VectorXd g(n), delta(n), x_new(n), step(n);
  std::vector<char> pinned(static_cast<std::size_t>(n), 0);
  Eigen::VectorXd scale = Eigen::VectorXd::Zero(n);
  if (opt.damping == LmDamping::Identity) scale.setOnes();
  double mu = -1.0;
  double nu = 2.0;
  bool relinearize = true;

  while (true) {
    if (relinearize) {
      numeric_jacobian(problem, s.x, r, J, opt.step);
      A.noalias() = J.transpose() * J;
      g.noalias() = J.transpose() * r;
      relinearize = false;
      // A parameter on its bound whose gradient points outward stays put.
      Eigen::VectorXd g_free = g;
      for (int j = 0; j < n; ++j) {
        pinned[j] = s.x[j] <= lower[j] && g[j] > 0.0;
        if (pinned[j]) g_free[j] = 0.0;
      }
      if (g_free.lpNorm<Eigen::Infinity>() < opt.gradient_tolerance) {
        s.termination = LmTermination::GradientSmall;
        break;
      }
      if (mu < 0.0) {
        mu = opt.damping == LmDamping::Identity
                 ? opt.initial_damping * std::max(A.diagonal().maxCoeff(), 1e-12)
                 : opt.initial_damping;
      }
      if (opt.damping == LmDamping::Marquardt) {
        // Running maximum keeps the scaling from collapsing on columns that
        // temporarily vanish.
        scale = scale.cwiseMax(A.diagonal().cwiseMax(1e-12));
      }
    }
    if (s.iterations >= opt.max_iterations) {
      s.termination = LmTermination::MaxIterations;
      break;
    }
    ++s.iterations;

    Eigen::MatrixXd damped = A;
    damped.diagonal() += mu * scale;
    Eigen::VectorXd rhs = -g;
    for (int j = 0; j < n; ++j) {
      if (!pinned[j]) continue;
      damped.row(j).setZero();
      damped.col(j).setZero();
      damped(j, j) = 1.0;
      rhs[j] = 0.0;
    }
    delta = damped.ldlt().solve(rhs);

    if (delta.norm() <= 1e-15 * (s.x.norm() + 1e-15)) {
      s.termination = LmTermination::StepSmall;
      break;
    }
    x_new = (s.x + delta).cwiseMax(lower);
    step = x_new - s.x;
    problem.residual(x_new, r_new);
    const double cost_new = 0.5 * r_new.squaredNorm();
    // Reduction predicted by the damped model; the projected step uses the
    // undamped Gauss-Newton model instead.
    const bool projected = step != delta;
    const double predicted = projected ? -(g.dot(step) + 0.5 * step.dot(A * step))
                                       : 0.5 * step.dot(mu * scale.cwiseProduct(step) - g);
    const double rho = (std::isfinite(cost_new) && predicted > 0.0)
                           ? (cost - cost_new) / predicted
                           : -1.0;
    if (rho > 0.0) {
      const double rel = (cost - cost_new) / std::max(cost, 1e-300);
      s.x = x_new;
      r.swap(r_new);
      cost = cost_new;
      ++s.accepted_steps;
      mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
      nu = 2.0;
      relinearize = true;
      if (rel < opt.relative_cost_tolerance) {
        s.termination = LmTermination::CostStalled;
        break;
      }
    } else {
      mu *= nu;
      nu *= 2.0;
      if (!std::isfinite(mu) || mu > 1e32) {
        s.termination = LmTermination::DampingExhausted;
        break;
      }
    }
  }
  s.final_cost = cost;
  if (!std::isfinite(cost)) throw Error(ErrorCode::SolverDiverged, "non-finite cost");
  return s;
}

}  // namespace smid
