#include "dfa/panel.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>

#include "dfa/csv.hpp"
#include "dfa/error.hpp"

namespace dfa {

namespace {

Eigen::Index count_missing(const Eigen::MatrixXd& m) {
  return static_cast<Eigen::Index>(m.unaryExpr([](double v) { return is_missing(v) ? 1.0 : 0.0; }).sum());
}

void check_dates_and_tickers(const std::vector<Date>& dates, const std::vector<std::string>& tickers) {
  for (std::size_t i = 1; i < dates.size(); ++i) {
    if (!(dates[i - 1] < dates[i])) {
      throw DataError("dates must be strictly increasing (at " + format_date(dates[i]) + ")");
    }
  }
  std::set<std::string> seen;
  for (const auto& t : tickers) {
    if (!seen.insert(t).second) throw DataError("duplicate ticker: " + t);
  }
}

struct ParsedTable {
  std::vector<Date> dates;
  std::vector<std::string> columns;
  Eigen::MatrixXd values;
};

// Shared reader for the date-indexed wide layout used by price and return files.
ParsedTable parse_dated_table(std::string_view text, const CsvOptions& options) {
  auto rows = csv::parse(text, options.delimiter);
  if (rows.empty()) throw DataError("empty CSV");
  const auto& header = rows.front();
  if (header.size() < 2) throw DataError("CSV header must contain a date column and at least one series");

  ParsedTable table;
  table.columns.assign(header.begin() + 1, header.end());
  for (const auto& name : table.columns) {
    if (name.empty()) throw DataError("empty column name in header");
  }
  check_dates_and_tickers({}, table.columns);

  const auto n_cols = static_cast<Eigen::Index>(table.columns.size());
  std::vector<std::pair<Date, std::size_t>> order;
  order.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (static_cast<Eigen::Index>(row.size()) > n_cols + 1) {
      throw DataError("row " + std::to_string(r + 1) + " has more fields than the header");
    }
    auto date = parse_date(row.front());
    if (!date) throw DataError("row " + std::to_string(r + 1) + ": unparseable date '" + row.front() + "'");
    order.emplace_back(*date, r);
  }
  std::sort(order.begin(), order.end());
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (order[i].first == order[i - 1].first) {
      throw DataError("duplicate date: " + format_date(order[i].first));
    }
  }

  table.values = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(order.size()), n_cols, kMissing);
  table.dates.reserve(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    table.dates.push_back(order[i].first);
    const auto& row = rows[order[i].second];
    for (Eigen::Index c = 0; c < n_cols && c + 1 < static_cast<Eigen::Index>(row.size()); ++c) {
      if (auto v = csv::parse_number(row[static_cast<std::size_t>(c + 1)]); v && std::isfinite(*v)) {
        table.values(static_cast<Eigen::Index>(i), c) = *v;
      }
    }
  }
  return table;
}

}  // namespace

Eigen::Index PricePanel::missing_count() const { return count_missing(prices); }

void PricePanel::validate() const {
  if (prices.rows() != static_cast<Eigen::Index>(dates.size()) ||
      prices.cols() != static_cast<Eigen::Index>(tickers.size())) {
    throw DataError("price panel dimensions do not match dates/tickers");
  }
  if (dates.size() < 2) throw DataError("price panel needs at least 2 dates");
  check_dates_and_tickers(dates, tickers);
  for (Eigen::Index t = 0; t < prices.rows(); ++t) {
    for (Eigen::Index s = 0; s < prices.cols(); ++s) {
      const double v = prices(t, s);
      if (!is_missing(v) && !(v > 0.0)) {
        throw DataError("non-positive price for " + tickers[static_cast<std::size_t>(s)] + " on " +
                        format_date(dates[static_cast<std::size_t>(t)]));
      }
    }
  }
}

Eigen::Index ReturnsPanel::missing_count() const { return count_missing(returns); }

std::vector<Eigen::Index> ReturnsPanel::empty_series() const {
  std::vector<Eigen::Index> out;
  for (Eigen::Index s = 0; s < returns.cols(); ++s) {
    if (returns.col(s).unaryExpr([](double v) { return is_missing(v) ? 0.0 : 1.0; }).sum() == 0.0) {
      out.push_back(s);
    }
  }
  return out;
}

Eigen::MatrixXd ReturnsPanel::zero_imputed() const {
  return returns.unaryExpr([](double v) { return is_missing(v) ? 0.0 : v; });
}

void ReturnsPanel::validate() const {
  if (returns.rows() != static_cast<Eigen::Index>(dates.size()) ||
      returns.cols() != static_cast<Eigen::Index>(tickers.size()) || means.size() != returns.cols()) {
    throw DataError("returns panel dimensions do not match dates/tickers/means");
  }
  check_dates_and_tickers(dates, tickers);
}

PricePanel parse_price_csv(std::string_view text, const CsvOptions& options) {
  auto table = parse_dated_table(text, options);
  PricePanel panel{std::move(table.dates), std::move(table.columns), std::move(table.values)};
  panel.validate();
  return panel;
}

PricePanel load_price_csv(const std::filesystem::path& path, const CsvOptions& options) {
  return parse_price_csv(csv::read_file(path), options);
}

ReturnsPanel load_returns_csv(const std::filesystem::path& path, const CsvOptions& options) {
  auto table = parse_dated_table(csv::read_file(path), options);
  ReturnsPanel panel;
  panel.dates = std::move(table.dates);
  panel.tickers = std::move(table.columns);
  panel.returns = std::move(table.values);
  panel.means = Eigen::VectorXd::Zero(panel.returns.cols());
  panel.centered = false;
  panel.validate();
  return panel;
}

void write_returns_csv(const ReturnsPanel& panel, const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write file: " + path.string());
  out << "date";
  for (const auto& t : panel.tickers) out << ',' << t;
  out << '\n';
  for (Eigen::Index t = 0; t < panel.rows(); ++t) {
    out << format_date(panel.dates[static_cast<std::size_t>(t)]);
    for (Eigen::Index s = 0; s < panel.cols(); ++s) out << ',' << csv::format_number(panel.returns(t, s));
    out << '\n';
  }
}

PricePanel filter_missing(const PricePanel& panel, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) throw UsageError("missing-data threshold must lie in [0, 1]");
  const auto rows = static_cast<double>(panel.rows());
  std::vector<Eigen::Index> keep;
  for (Eigen::Index s = 0; s < panel.cols(); ++s) {
    const double missing = panel.prices.col(s).unaryExpr([](double v) { return is_missing(v) ? 1.0 : 0.0; }).sum();
    if (missing / rows <= threshold) keep.push_back(s);
  }
  if (keep.empty()) {
    throw DataError("every series exceeds the missing-data threshold " + std::to_string(threshold));
  }
  PricePanel out;
  out.dates = panel.dates;
  out.prices.resize(panel.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    out.tickers.push_back(panel.tickers[static_cast<std::size_t>(keep[k])]);
    out.prices.col(static_cast<Eigen::Index>(k)) = panel.prices.col(keep[k]);
  }
  return out;
}

ReturnsPanel compute_returns(const PricePanel& panel, const ReturnOptions& options) {
  if (panel.rows() < 2) throw DataError("at least 2 price rows are needed to compute returns");
  const Eigen::Index T = panel.rows() - 1;
  const Eigen::Index S = panel.cols();
  const double scale = options.percent ? 100.0 : 1.0;

  ReturnsPanel out;
  out.dates.assign(panel.dates.begin() + 1, panel.dates.end());
  out.tickers = panel.tickers;
  out.returns.resize(T, S);
  out.means = Eigen::VectorXd::Zero(S);
  for (Eigen::Index s = 0; s < S; ++s) {
    for (Eigen::Index t = 0; t < T; ++t) {
      const double prev = panel.prices(t, s);
      const double cur = panel.prices(t + 1, s);
      out.returns(t, s) = (is_missing(prev) || is_missing(cur)) ? kMissing : scale * (cur - prev) / prev;
    }
  }
  if (options.center) {
    for (Eigen::Index s = 0; s < S; ++s) {
      double sum = 0.0;
      Eigen::Index count = 0;
      for (Eigen::Index t = 0; t < T; ++t) {
        if (!is_missing(out.returns(t, s))) {
          sum += out.returns(t, s);
          ++count;
        }
      }
      if (count == 0) continue;
      out.means(s) = sum / static_cast<double>(count);
      for (Eigen::Index t = 0; t < T; ++t) out.returns(t, s) -= out.means(s);
    }
    out.centered = true;
  }
  return out;
}

}  // namespace dfa
