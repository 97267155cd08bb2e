#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "dfa/csv.hpp"
#include "dfa/date.hpp"
#include "dfa/panel.hpp"

namespace dfa {

/// A single date-indexed series; NaN marks missing values.
struct DatedSeries {
  std::string name;
  std::vector<Date> dates;
  Eigen::VectorXd values;
};

/// Reads a two-column `date,value` CSV (header required). `column` picks a
/// value column by header name; empty selects the second column.
DatedSeries load_series_csv(const std::filesystem::path& path, const std::string& column = "");

/// Percentage (or fractional) simple returns of a level series, dated at the later observation.
DatedSeries returns_from_prices(const DatedSeries& prices, bool percent = true);

/// Values of `series` on `dates` (NaN where the date is absent).
Eigen::VectorXd align(const DatedSeries& series, const std::vector<Date>& dates);

struct CapmResult {
  Eigen::VectorXd betas;
  Eigen::VectorXd intercepts;
  Eigen::VectorXd r_squared;
  Eigen::VectorXi n_obs;
  double risk_free = 0.0;
};

/// Per-series OLS of (R_i - rf) on (R_M - rf) with an intercept. The panel's
/// removed means are added back first. Throws DataError when a series has
/// fewer than 3 observations aligned with the market.
CapmResult capm_betas(const ReturnsPanel& stocks, const DatedSeries& market, double risk_free = 0.0);

/// Pearson correlation over pairs where both values are present.
/// Throws DataError for fewer than 2 pairs or a constant series.
double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct Regression {
  Eigen::VectorXd coef;  // intercept first
  double r_squared = 0.0;
  Eigen::Index n_obs = 0;
};

/// OLS of y on an intercept plus the columns of x, over rows with no missing value.
/// Throws NumericalError for a rank-deficient design.
Regression regress(const Eigen::VectorXd& y, const Eigen::MatrixXd& x);

}  // namespace dfa
