#pragma once

#include <string>

#include <Eigen/Core>

#include "smid/kernels.hpp"

namespace smid {

/// Damping matrix added to J^T J: mu * I, or mu * diag(J^T J) as in
/// Marquardt's scaled form.
enum class LmDamping { Identity, Marquardt };

struct LmOptions {
  int max_iterations = 400;
  double relative_cost_tolerance = 1e-10;
  double gradient_tolerance = 1e-10;
  double initial_damping = 1e-3;  // tau: mu0 = tau * max diag(J^T J), or tau when scaled
  LmDamping damping = LmDamping::Marquardt;
  DifferenceStep step;
};

enum class LmTermination { GradientSmall, CostStalled, StepSmall, MaxIterations, DampingExhausted };

std::string_view to_string(LmTermination t);

struct LmSummary {
  Eigen::VectorXd x;
  double initial_cost = 0.0;  // 0.5 * ||r||^2
  double final_cost = 0.0;
  int iterations = 0;         // linear solves, accepted or not
  int accepted_steps = 0;
  LmTermination termination = LmTermination::MaxIterations;

  bool converged() const {
    return termination != LmTermination::MaxIterations &&
           termination != LmTermination::DampingExhausted;
  }
};

/// Levenberg-Marquardt with Nielsen's damping update and a forward
/// difference Jacobian. Parameters with a finite lower_bound() are kept
/// feasible by projecting each trial step; a bound parameter whose gradient
/// points out of the feasible set is held fixed for that linearization.
/// Throws SolverDiverged if the cost at x0 is not finite.
LmSummary levenberg_marquardt(LeastSquaresProblem& problem, const Eigen::VectorXd& x0,
                              const LmOptions& options = {});

}  // namespace smid
