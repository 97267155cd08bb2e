#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "dfa/kalman.hpp"
#include "dfa/optimize.hpp"
#include "dfa/panel.hpp"
#include "dfa/state_space.hpp"

namespace dfa {

/// Two-sided 5% critical value of the standard normal.
inline constexpr double kCritical95 = 1.959963984540054;

struct FitOptions {
  optim::Settings optimizer{};
  /// Relative tolerance for freezing the Kalman gain during likelihood
  /// evaluation; 0 runs the full recursion at every step.
  double steady_state_tol = 1e-14;
  bool compute_std_errors = true;
  bool compute_factors = true;
  std::optional<DFMParams> start;  // overrides initialize_params
};

struct FittedModel {
  DFMParams params;
  DFMSpec spec;
  double loglik = 0.0;
  double init_loglik = 0.0;
  bool converged = false;
  int iterations = 0;
  double gradient_norm = 0.0;  // max-norm in the packed space at the optimum
  std::string stop_reason;

  /// Same shapes as params; NaN where an error is unavailable or the entry is fixed.
  std::optional<DFMParams> std_errors;
  Eigen::MatrixXd factors_filtered;  // T x n
  Eigen::MatrixXd factors_smoothed;  // T x n
  std::vector<Date> dates;
  std::vector<std::string> tickers;
  std::vector<std::string> warnings;
};

/// PCA-based starting values rotated onto the identification constraint and
/// shrunk until stationary. Throws DataError for zero-variance series.
DFMParams initialize_params(const ReturnsPanel& returns, const DFMSpec& spec);

/// Number of free coordinates in the packed vector.
Eigen::Index packed_size(const DFMSpec& spec);

/// Maps parameters to an unconstrained vector. Layout: free beta entries
/// (row-major, identification diagonal through inverse softplus), log sigma,
/// VAR coefficients through the stationarity transform, then per-series AR
/// coefficients through the same transform.
Eigen::VectorXd pack(const DFMParams& params, const DFMSpec& spec);
DFMParams unpack(const Eigen::VectorXd& x, const DFMSpec& spec);

/// Natural-parameter vector: beta row-major, sigma, lambda (row-major per lag), psi (lag-major).
Eigen::VectorXd flatten(const DFMParams& params);
DFMParams unflatten(const Eigen::VectorXd& v, const DFMSpec& spec);

/// Negative log-likelihood over the packed space; +inf when the model cannot be evaluated.
class NegativeLogLikelihood {
 public:
  NegativeLogLikelihood(const ReturnsPanel& returns, const DFMSpec& spec, double steady_state_tol = 0.0);
  double operator()(const Eigen::VectorXd& x);

 private:
  const Eigen::MatrixXd* obs_;
  DFMSpec spec_;
  FilterOptions options_;
  LikelihoodWorkspace workspace_;
};

FittedModel fit_mle(const ReturnsPanel& returns, const DFMSpec& spec, const FitOptions& options = {});

struct StdErrorReport {
  DFMParams errors;                  // NaN = unavailable
  Eigen::MatrixXd beta_tstat;        // S x n
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> beta_significant;  // at the 5% level
  std::vector<std::string> warnings;
};

/// Inverse numerical Hessian in the packed space mapped to natural parameters by
/// the delta method. Coordinates touched by non-positive curvature are NaN.
StdErrorReport standard_errors(const FittedModel& fitted, const ReturnsPanel& returns, double steady_state_tol = 1e-14);

/// Filtered and smoothed common-factor paths (T x n) for given parameters.
struct FactorEstimates {
  Eigen::MatrixXd filtered;
  Eigen::MatrixXd smoothed;
};
FactorEstimates extract_factors(const DFMParams& params, const DFMSpec& spec, const Eigen::MatrixXd& obs);

}  // namespace dfa
