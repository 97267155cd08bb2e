#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "dfa/date.hpp"
#include "dfa/panel.hpp"
#include "dfa/state_space.hpp"

namespace dfa {

/// Quarterly target series, chronologically ordered without duplicates.
struct QuarterlySeries {
  std::vector<Quarter> quarters;
  Eigen::VectorXd values;

  /// Index of `q`, or -1 when absent.
  Eigen::Index find(const Quarter& q) const;
};

/// Reads a CSV with columns `year`, `quarter` (1-4 or Q1-Q4) and a value
/// column (default `growth`). Rows are sorted; duplicates are an error.
QuarterlySeries load_gdp_csv(const std::filesystem::path& path, const std::string& value_column = "growth");

enum class GrowthKind { YearOnYear, QuarterOnQuarter };

/// Percentage growth rates from levels; the first 4 (or 1) quarters are dropped.
QuarterlySeries growth_from_levels(const QuarterlySeries& levels, GrowthKind kind);

/// Daily factor paths on a shared calendar.
struct FactorPaths {
  std::vector<Date> dates;
  Eigen::MatrixXd smoothed;  // T x n
  Eigen::MatrixXd filtered;  // T x n
};

/// Filtered paths over the full sample, and smoothed paths that only use
/// observations dated before `boundary`. From the boundary on, the smoothed
/// columns repeat the filtered values.
FactorPaths real_time_factor_paths(const DFMParams& params, const DFMSpec& spec, const ReturnsPanel& returns,
                                   const Date& boundary);

/// Monthly mean and standard deviation of each factor.
struct MonthlyIndicators {
  std::vector<YearMonth> months;
  Eigen::MatrixXd mean;  // months x n
  Eigen::MatrixXd sd;    // months x n, denominator days - 1, zero for single-day months
  Eigen::VectorXi days;

  Eigen::Index find(const YearMonth& m) const;
  Eigen::Index factors() const { return mean.cols(); }
};

/// Indicators drawn from the smoothed path on days before `boundary` and the
/// filtered path from the boundary on. Only months with trading days appear.
MonthlyIndicators monthly_indicators(const FactorPaths& paths, const Date& boundary);

/// Indicators of a single daily path.
MonthlyIndicators monthly_indicators(const std::vector<Date>& dates, const Eigen::MatrixXd& path);

/// Inclusive quarter range.
struct QuarterRange {
  Quarter first;
  Quarter last;
  bool contains(const Quarter& q) const { return !(q < first) && !(last < q); }
};

struct NowcastWindows {
  QuarterRange in_sample;
  QuarterRange out_sample;
};

/// One-step-ahead OLS nowcast of quarterly growth: intercept, previous-quarter
/// growth, then optionally the monthly indicators of the quarter's three months
/// ordered month, factor, {mean, sd}.
struct BridgeModel {
  std::vector<std::string> names;  // one per coefficient
  Eigen::VectorXd coefficients;
  std::vector<Quarter> in_quarters, out_quarters;
  Eigen::VectorXd in_actual, in_pred, out_actual, out_pred;
  double in_sample_rmse = 0.0;
  double out_sample_rmse = 0.0;  // NaN when the out-of-sample window is empty
  std::vector<std::string> warnings;
};

/// Throws DataError for fewer than 3 usable in-sample quarters. A constant
/// in-sample lag leaves only the intercept.
BridgeModel fit_ar1(const QuarterlySeries& gdp, const NowcastWindows& windows);

struct BridgeOptions {
  /// z-score each indicator with its in-sample mean and sd before OLS.
  bool standardize = false;
};

/// Indicator columns that are constant zero in sample carry a zero coefficient.
/// Throws DataError when a quarter lacks one of its months and NumericalError
/// for a rank-deficient design.
BridgeModel fit_bridge(const QuarterlySeries& gdp, const MonthlyIndicators& indicators, const NowcastWindows& windows,
                       const BridgeOptions& options = {});

/// Root mean squared difference. Throws UsageError for empty or mismatched input.
double rmse(const Eigen::VectorXd& pred, const Eigen::VectorXd& actual);

}  // namespace dfa
