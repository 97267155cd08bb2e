#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dfa/state_space.hpp"

namespace dfa::testing {

/// sum_k A^k Q A'^k, truncated once terms fall below 1e-18 relative.
Eigen::MatrixXd truncated_stationary_covariance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q);

/// Moments of the stacked states X_1..X_T and observations Y_1..Y_T when
/// X_0 ~ N(m0, p0), built directly from the model equations.
struct JointGaussian {
  Eigen::VectorXd mean_x, mean_y;
  Eigen::MatrixXd cov_xx, cov_yy, cov_xy;
};

JointGaussian joint_distribution(const StateSpaceModel& model, Eigen::Index steps, const Eigen::VectorXd& m0,
                                 const Eigen::MatrixXd& p0);

/// Log-density of the observed (non-NaN) entries of obs under the joint Gaussian.
double oracle_loglik(const StateSpaceModel& model, const Eigen::MatrixXd& obs, const Eigen::VectorXd& m0,
                     const Eigen::MatrixXd& p0);

/// E[X_t | observed Y] and Cov[X_t | observed Y] for every t.
struct OracleSmooth {
  Eigen::MatrixXd mean;              // T x d
  std::vector<Eigen::MatrixXd> cov;  // T of d x d
};

OracleSmooth oracle_smoother(const StateSpaceModel& model, const Eigen::MatrixXd& obs, const Eigen::VectorXd& m0,
                             const Eigen::MatrixXd& p0);

/// Sample covariance by explicit double loop (denominator T - 1).
Eigen::MatrixXd brute_force_covariance(const Eigen::MatrixXd& data);

/// Pearson correlation from the textbook definition.
double brute_force_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace dfa::testing
