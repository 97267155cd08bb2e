#pragma once

#include <Eigen/Dense>
#include <vector>

namespace dfa::transform {

/// Maps p unconstrained k x k matrices to the coefficients of a stationary
/// VAR(p) with identity innovation covariance.
///
/// Each matrix U_s is sent to a partial autocorrelation P_s = chol(I + U U')^{-1} U
/// (all singular values < 1), the multivariate Levinson-Whittle recursion turns
/// the partial autocorrelations into coefficients of a process with unit
/// lag-zero covariance, and a final lower-triangular change of basis rescales
/// the innovation covariance to the identity. Every stationary VAR with
/// identity innovations has exactly one preimage.
std::vector<Eigen::MatrixXd> constrain_stationary(const std::vector<Eigen::MatrixXd>& unconstrained);

/// Inverse of constrain_stationary. Throws NumericalError for non-stationary input.
std::vector<Eigen::MatrixXd> unconstrain_stationary(const std::vector<Eigen::MatrixXd>& coefficients);

/// Scalar AR(q) convenience wrappers over the k = 1 case.
Eigen::VectorXd constrain_ar(const Eigen::VectorXd& unconstrained);
Eigen::VectorXd unconstrain_ar(const Eigen::VectorXd& coefficients);

}  // namespace dfa::transform
