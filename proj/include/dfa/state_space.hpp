#pragma once

#include <Eigen/Dense>
#include <vector>

namespace dfa {

/// Model orders of a dynamic factor model.
struct DFMSpec {
  Eigen::Index n = 1;  // common factors
  Eigen::Index p = 1;  // factor VAR order
  Eigen::Index q = 0;  // idiosyncratic AR order
  Eigen::Index S = 1;  // observed series

  Eigen::Index idio_lags() const { return q > 0 ? q : 1; }
  Eigen::Index state_dim() const { return n * p + S * idio_lags(); }
  Eigen::Index idio_offset() const { return n * p; }

  /// Throws UsageError unless n >= 1, p >= 1, q >= 0, S >= 1.
  void validate() const;

  bool operator==(const DFMSpec&) const = default;
};

/// Estimable quantities of the model
///   R_t = beta F_t + diag(sigma) Z_t
///   F_t = sum_j lambda[j] F_{t-j-1} + eps_t,    eps_t ~ N(0, I_n)
///   Z_it = sum_j psi[j](i) Z_i(t-j-1) + gamma_it, gamma_it ~ N(0, 1)
struct DFMParams {
  Eigen::MatrixXd beta;               // S x n
  Eigen::VectorXd sigma;              // S
  std::vector<Eigen::MatrixXd> lambda;  // p grids, n x n
  std::vector<Eigen::VectorXd> psi;     // q diagonals, length S

  /// Throws UsageError when shapes disagree with `spec`.
  void check_shapes(const DFMSpec& spec) const;
};

/// Y_t = measure X_t + e_t, X_t = transit X_{t-1} + u_t,
/// e_t ~ N(0, measure_noise), u_t ~ N(0, state_noise).
struct StateSpaceModel {
  Eigen::MatrixXd measure;        // S x d
  Eigen::MatrixXd transit;        // d x d
  Eigen::MatrixXd measure_noise;  // S x S
  Eigen::MatrixXd state_noise;    // d x d

  Eigen::Index obs_dim() const { return measure.rows(); }
  Eigen::Index state_dim() const { return transit.rows(); }
};

StateSpaceModel assemble_state_space(const DFMParams& params, const DFMSpec& spec);

/// Inverse of assemble_state_space; recovers the parameters exactly.
DFMParams disassemble_state_space(const StateSpaceModel& model, const DFMSpec& spec);

/// Unique P with P = T P T' + state_noise. Throws NumericalError when T is not stable.
Eigen::MatrixXd stationary_state_covariance(const StateSpaceModel& model);

struct StationarityReport {
  double factor_radius = 0.0;
  double idio_radius = 0.0;  // max over series
  bool stationary = false;
};

StationarityReport check_stationarity(const DFMParams& params);

/// Companion matrix of the factor VAR.
Eigen::MatrixXd factor_companion(const DFMParams& params);

/// Companion matrix of series i's AR polynomial (empty when q = 0).
Eigen::MatrixXd idio_companion(const DFMParams& params, Eigen::Index series);

/// Stationary covariance of the factor vector F_t (n x n).
Eigen::MatrixXd factor_covariance(const DFMParams& params);

/// Stationary variance of a unit-innovation AR process per series.
Eigen::VectorXd idio_unit_variance(const DFMParams& params);

/// Per-series Var(R_it) = beta_i' Sigma_F beta_i + sigma_i^2 Var(Z_it).
Eigen::VectorXd implied_return_variance(const DFMParams& params, const DFMSpec& spec);

/// True when the top n x n block of beta is lower triangular with nonnegative diagonal.
bool satisfies_identification(const Eigen::MatrixXd& beta);

}  // namespace dfa
