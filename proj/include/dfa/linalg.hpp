#pragma once

#include <Eigen/Dense>
#include <vector>

namespace dfa::linalg {

/// Largest eigenvalue magnitude of a square matrix (0 for an empty one).
double spectral_radius(const Eigen::MatrixXd& a);

/// Stacks lag coefficient blocks into first-order companion form.
/// `blocks[j]` multiplies the (j+1)-th lag; all blocks are k x k.
Eigen::MatrixXd companion(const std::vector<Eigen::MatrixXd>& blocks);

/// Solves P = A P A' + Q for symmetric Q, requiring spectral_radius(A) < 1.
/// Decoupled diagonal blocks (by sparsity of A and Q) are solved independently;
/// small blocks use the vectorized Kronecker system, larger ones the doubling iteration.
Eigen::MatrixXd solve_discrete_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q);

/// Moore-Penrose inverse of a symmetric matrix; eigenvalues below
/// rel_tol * max|eigenvalue| are treated as zero.
Eigen::MatrixXd symmetric_pinv(const Eigen::MatrixXd& a, double rel_tol = 1e-10);

/// Replaces `a` by (a + a') / 2 so the result is exactly symmetric.
void symmetrize(Eigen::MatrixXd& a);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Eigen::MatrixXd& a);

struct LeastSquares {
  Eigen::VectorXd coef;
  Eigen::VectorXd fitted;
  Eigen::VectorXd residuals;
  Eigen::Index rank = 0;
};

/// Ordinary least squares of y on the columns of x (no implicit intercept).
/// Throws NumericalError when x is rank deficient.
LeastSquares ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

}  // namespace dfa::linalg
