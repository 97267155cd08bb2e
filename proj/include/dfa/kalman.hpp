#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "dfa/state_space.hpp"

namespace dfa {

/// Distribution of the state before the first observation, X_0 ~ N(mean, cov).
struct InitialState {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

/// Diffuse fallback variance used when the transition is not stable.
inline constexpr double kDiffuseVariance = 1e7;

/// Zero mean with the stationary covariance, or a diffuse diagonal when the
/// transition has a unit or explosive root.
InitialState default_initial_state(const StateSpaceModel& model);

struct FilterOptions {
  bool store_covariances = true;
  /// Freeze the gain once consecutive predicted covariances differ by at most
  /// this relative amount (only across fully observed rows). 0 disables.
  double steady_state_tol = 0.0;
};

struct FilterResult {
  Eigen::MatrixXd pred_mean;              // T x d, mu_{t|t-1}
  std::vector<Eigen::MatrixXd> pred_cov;  // Sigma_{t|t-1}
  Eigen::MatrixXd filt_mean;              // T x d, mu_{t|t}
  std::vector<Eigen::MatrixXd> filt_cov;  // Sigma_{t|t}
  Eigen::VectorXd loglik_terms;
  double loglik = 0.0;
};

struct SmootherResult {
  Eigen::MatrixXd smooth_mean;              // T x d, mu_{t|T}
  std::vector<Eigen::MatrixXd> smooth_cov;  // Sigma_{t|T}
};

/// Forward recursions. `obs` is T x S with NaN marking missing entries; rows of
/// the measurement matrix for missing entries are dropped at that step.
/// Throws UsageError on dimension mismatch or infinite observations, and
/// NumericalError when the innovation covariance stays singular after jitter.
FilterResult kalman_filter(const StateSpaceModel& model, const Eigen::MatrixXd& obs,
                           const std::optional<InitialState>& init = std::nullopt,
                           const FilterOptions& options = {});

/// Backward (Rauch-Tung-Striebel) recursions over a stored filter pass.
/// The predicted covariance is inverted with a tolerance-controlled pseudo-inverse.
SmootherResult kalman_smoother(const StateSpaceModel& model, const FilterResult& filt, double pinv_tol = 1e-10);

/// Reusable buffers for repeated likelihood evaluation on one worker.
/// Not shareable across threads.
struct LikelihoodWorkspace {
  Eigen::VectorXd mean, mean_pred, innovation;
  Eigen::MatrixXd cov, cov_pred, cov_prev, tmp, gain, pm_t, innov_cov, measure_obs;
};

double log_likelihood(const StateSpaceModel& model, const Eigen::MatrixXd& obs,
                      const std::optional<InitialState>& init = std::nullopt);

double log_likelihood(const StateSpaceModel& model, const Eigen::MatrixXd& obs, const std::optional<InitialState>& init,
                      LikelihoodWorkspace& workspace, const FilterOptions& options = {});

}  // namespace dfa
