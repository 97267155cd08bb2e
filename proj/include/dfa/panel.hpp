#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <filesystem>
#include <limits>
#include <string>
#include <vector>

#include "dfa/date.hpp"

namespace dfa {

/// Missing entries in every panel and series are stored as quiet NaN.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return std::isnan(v); }

/// Closing prices, one row per trading date and one column per ticker.
struct PricePanel {
  std::vector<Date> dates;
  std::vector<std::string> tickers;
  Eigen::MatrixXd prices;  // T x S, NaN = missing

  Eigen::Index rows() const { return prices.rows(); }
  Eigen::Index cols() const { return prices.cols(); }
  Eigen::Index missing_count() const;

  /// Throws DataError when an invariant is broken (ordering, duplicates, T < 2, prices <= 0).
  void validate() const;
};

/// Percentage returns aligned with the later date of each price pair.
struct ReturnsPanel {
  std::vector<Date> dates;
  std::vector<std::string> tickers;
  Eigen::MatrixXd returns;  // T x S, NaN = missing
  Eigen::VectorXd means;    // removed during centering, zero otherwise
  bool centered = false;

  Eigen::Index rows() const { return returns.rows(); }
  Eigen::Index cols() const { return returns.cols(); }
  Eigen::Index missing_count() const;

  /// Indices of series with no present return at all.
  std::vector<Eigen::Index> empty_series() const;

  /// Copy of the returns with missing entries replaced by zero (the centered mean).
  Eigen::MatrixXd zero_imputed() const;

  void validate() const;
};

struct CsvOptions {
  char delimiter = ',';
};

PricePanel load_price_csv(const std::filesystem::path& path, const CsvOptions& options = {});
PricePanel parse_price_csv(std::string_view text, const CsvOptions& options = {});

/// Reads a returns CSV written by write_returns_csv. Means are taken as zero.
ReturnsPanel load_returns_csv(const std::filesystem::path& path, const CsvOptions& options = {});
void write_returns_csv(const ReturnsPanel& panel, const std::filesystem::path& path);

/// Keeps the series whose fraction of missing prices is at most `threshold`.
PricePanel filter_missing(const PricePanel& panel, double threshold);

struct ReturnOptions {
  bool center = true;
  bool percent = true;  // scale by 100
};

ReturnsPanel compute_returns(const PricePanel& panel, const ReturnOptions& options = {});

}  // namespace dfa
