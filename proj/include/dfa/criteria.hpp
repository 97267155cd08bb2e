#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "dfa/estimation.hpp"
#include "dfa/panel.hpp"

namespace dfa {

/// Bai-Ng criteria for n = 0..n_max factors.
struct CriteriaTable {
  Eigen::VectorXd residual_mse;  // V(n)
  Eigen::VectorXd ic1, ic2, ic3;
  Eigen::Index n_series = 0;
  Eigen::Index n_obs = 0;

  Eigen::Index n_max() const { return ic1.size() - 1; }
  Eigen::Index argmin_ic1() const;
  Eigen::Index argmin_ic2() const;
  Eigen::Index argmin_ic3() const;
};

/// Evaluates the three criteria from a residual-variance path V(0..n_max)
/// for a panel of n_series series observed over n_obs periods.
CriteriaTable bai_ng_from_mse(const Eigen::VectorXd& residual_mse, Eigen::Index n_series, Eigen::Index n_obs);

/// Throws UsageError for n_max < 1 or n_max > min(S, T), and DataError when
/// some V(n) is zero (the panel is exactly spanned by fewer factors).
CriteriaTable bai_ng_table(const ReturnsPanel& returns, Eigen::Index n_max);

/// -2 loglik + k ln(t_obs).
double bic(double loglik, double k_params, Eigen::Index t_obs);

/// Free-parameter count S n + S + n^2 p + S q.
Eigen::Index bic_param_count(const DFMSpec& spec);

struct OrderCandidate {
  Eigen::Index p = 0;
  Eigen::Index q = 0;
  bool ok = false;
  double loglik = 0.0;
  double bic = 0.0;
  bool converged = false;
  std::string error;
};

struct OrderSelection {
  Eigen::Index p = 0;
  Eigen::Index q = 0;
  std::vector<OrderCandidate> candidates;  // grid order, p-major
};

struct SelectOptions {
  FitOptions fit{};
  unsigned jobs = 1;
};

/// Fits every (p, q) in the grids and returns the BIC minimizer. Failed fits
/// are recorded and skipped; ties go to the smaller p + q, then the smaller p.
/// Throws NumericalError when every candidate fails.
OrderSelection select_order(const ReturnsPanel& returns, Eigen::Index n, const std::vector<Eigen::Index>& p_grid,
                            const std::vector<Eigen::Index>& q_grid, const SelectOptions& options = {});

}  // namespace dfa
