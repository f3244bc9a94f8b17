#pragma once

#include <functional>
#include <string>

#include <Eigen/Dense>

namespace lmsig {

// Objective value; fills *grad when non-null.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

struct BfgsOptions {
  double grad_tol = 1e-6;  // sup-norm of the gradient
  int max_iter = 500;
  // Start from the inverse of a finite-difference Hessian of the gradient
  // instead of a scaled identity.
  bool hessian_start = true;
};

struct OptimResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd gradient;
  int iterations = 0;
  int evaluations = 0;
  bool converged = false;
  std::string message;
};

// BFGS maximization with a backtracking line search. Stops at the gradient tolerance,
// or when steps stall and the Newton decrement is below rounding. On non-convergence the
// last iterate is returned with converged == false.
OptimResult maximize_bfgs(const Objective& f, Eigen::VectorXd x0, const BfgsOptions& opts = {});

// Central differences of the analytic gradient, symmetrized.
Eigen::MatrixXd fd_hessian(const Objective& f, const Eigen::VectorXd& x, double rel_step = 1e-5);

}  // namespace lmsig
