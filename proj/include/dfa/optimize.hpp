#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace dfa::optim {

/// Objective to minimize. Returning a non-finite value marks the point as infeasible.
using Objective = std::function<double(const Eigen::VectorXd&)>;

struct Settings {
  int max_iterations = 500;
  double grad_tol = 1e-4;     // max-norm of the gradient
  /// Relative change of the objective between iterations. Two consecutive small
  /// changes stop the search once the gradient is within 10x grad_tol; ten
  /// consecutive ones stop it regardless.
  double rel_tol = 1e-9;
  double fd_step = 1e-5;      // relative central-difference step
};

struct Result {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd gradient;
  int iterations = 0;
  long evaluations = 0;
  bool converged = false;
  std::string reason;
};

/// Central differences with step rel_step * max(|x_i|, 1).
Eigen::VectorXd numerical_gradient(const Objective& f, const Eigen::VectorXd& x, double rel_step = 1e-5);

/// Symmetric central-difference Hessian.
Eigen::MatrixXd numerical_hessian(const Objective& f, const Eigen::VectorXd& x, double rel_step = 1e-4);

/// Quasi-Newton (BFGS, inverse-Hessian form) with Armijo backtracking and
/// numerical gradients. Throws NumericalError when f(x0) is not finite.
Result minimize_bfgs(const Objective& f, const Eigen::VectorXd& x0, const Settings& settings = {});

}  // namespace dfa::optim
