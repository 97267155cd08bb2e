#pragma once

#include <Eigen/Dense>

#include "dfa/panel.hpp"

namespace dfa {

enum class MissingPolicy {
  ImputeZero,  // replace missing entries by the (centered) mean, zero
  Pairwise,    // covariance from pairwise-complete rows; PCA still scores the imputed panel
};

struct CovarianceOptions {
  MissingPolicy missing = MissingPolicy::ImputeZero;
  bool correlation = false;  // standardize series before decomposition
};

struct PCAResult {
  Eigen::VectorXd eigenvalues;   // all S eigenvalues, descending
  Eigen::MatrixXd loadvectors;   // S x k, unit columns, largest-magnitude entry positive
  Eigen::MatrixXd components;    // T x k, centered data times loadvectors

  double explained_fraction(Eigen::Index j) const { return eigenvalues(j) / eigenvalues.sum(); }
};

/// Sample covariance (denominator T - 1) of a complete T x S data matrix.
Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& data);

/// Sample covariance of a returns panel under the given missing-data policy.
/// Throws DataError when T < 2 or a series has no present entries.
Eigen::MatrixXd sample_covariance(const ReturnsPanel& returns, const CovarianceOptions& options = {});

/// Centered (and, with correlation set, standardized) zero-imputed data matrix
/// that principal components are scored on.
Eigen::MatrixXd pca_data_matrix(const ReturnsPanel& returns, const CovarianceOptions& options = {});

PCAResult principal_components(const ReturnsPanel& returns, Eigen::Index k, const CovarianceOptions& options = {});

/// V(n): mean over all N T entries of the squared residual after projecting
/// the centered panel on its top n principal directions.
double pca_residual_mse(const ReturnsPanel& returns, Eigen::Index n);

/// V(0), ..., V(n_max) from a single eigendecomposition.
Eigen::VectorXd pca_residual_mse_path(const ReturnsPanel& returns, Eigen::Index n_max);

}  // namespace dfa
