#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

#include "dfa/panel.hpp"
#include "dfa/state_space.hpp"

namespace dfa::testing {

using Rng = std::mt19937_64;

Eigen::MatrixXd normal_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double sd = 1.0);
double uniform(Rng& rng, double lo, double hi);

/// Random parameters satisfying every invariant: identified loadings,
/// positive scales, and stationary dynamics via the stationarity transform.
DFMParams random_params(Rng& rng, const DFMSpec& spec, double coef_scale = 0.6);

/// Generic stable state-space model with a positive-definite measurement noise.
StateSpaceModel random_generic_model(Rng& rng, Eigen::Index d, Eigen::Index S);

/// Returns panel wrapping a raw matrix on a weekday calendar; means are zero.
ReturnsPanel panel_from_matrix(const Eigen::MatrixXd& data, bool centered = false);

/// Centers each column over present entries.
ReturnsPanel centered_panel(const Eigen::MatrixXd& data);

/// One-factor parameters with given loadings, lambda and per-series psi (q = 1).
DFMParams one_factor_params(const Eigen::VectorXd& beta, double lambda, const Eigen::VectorXd& psi,
                            const Eigen::VectorXd& sigma);

}  // namespace dfa::testing
