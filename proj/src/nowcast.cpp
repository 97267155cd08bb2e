#include "dfa/nowcast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dfa/csv.hpp"
#include "dfa/error.hpp"
#include "dfa/kalman.hpp"
#include "dfa/linalg.hpp"

namespace dfa {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::optional<int> parse_quarter_number(std::string_view cell) {
  std::string s = csv::trim(cell);
  if (!s.empty() && (s[0] == 'Q' || s[0] == 'q')) s.erase(0, 1);
  const auto v = csv::parse_number(s);
  if (!v || *v != std::floor(*v) || *v < 1 || *v > 4) return std::nullopt;
  return static_cast<int>(*v);
}

std::size_t header_index(const csv::Row& header, const std::string& name, const std::filesystem::path& path) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (csv::trim(header[i]) == name) return i;
  throw DataError(path.string() + ": missing column '" + name + "'");
}

struct Design {
  std::vector<Quarter> quarters;
  MatrixXd x;
  VectorXd y;
};

// Rows for quarters in `range` whose previous quarter is also observed.
// Columns: intercept, lagged growth, then `extra` columns from `row_extra`.
template <class Extra>
Design build_design(const QuarterlySeries& gdp, const QuarterRange& range, Index extra, Extra row_extra) {
  Design d;
  std::vector<Index> rows;
  for (Index i = 0; i < gdp.values.size(); ++i) {
    const Quarter q = gdp.quarters[static_cast<std::size_t>(i)];
    if (!range.contains(q)) continue;
    if (gdp.find(q.prev()) < 0) continue;
    rows.push_back(i);
  }
  const Index m = static_cast<Index>(rows.size());
  d.x.resize(m, 2 + extra);
  d.y.resize(m);
  for (Index r = 0; r < m; ++r) {
    const Index i = rows[static_cast<std::size_t>(r)];
    const Quarter q = gdp.quarters[static_cast<std::size_t>(i)];
    d.quarters.push_back(q);
    d.y(r) = gdp.values(i);
    d.x(r, 0) = 1.0;
    d.x(r, 1) = gdp.values(gdp.find(q.prev()));
    if (extra > 0) d.x.row(r).tail(extra) = row_extra(q);
  }
  return d;
}

BridgeModel finish(const Design& in, const Design& out, const VectorXd& coef, std::vector<std::string> names) {
  BridgeModel model;
  model.names = std::move(names);
  model.coefficients = coef;
  model.in_quarters = in.quarters;
  model.out_quarters = out.quarters;
  model.in_actual = in.y;
  model.in_pred = in.x * coef;
  model.out_actual = out.y;
  model.out_pred = out.x * coef;
  model.in_sample_rmse = rmse(model.in_pred, model.in_actual);
  model.out_sample_rmse = out.y.size() > 0 ? rmse(model.out_pred, model.out_actual) : kNaN;
  if (out.y.size() == 0) model.warnings.push_back("out-of-sample window contains no usable quarters");
  return model;
}

void check_windows(const NowcastWindows& w) {
  if (w.in_sample.last < w.in_sample.first || w.out_sample.last < w.out_sample.first) {
    throw UsageError("a quarter range ends before it starts");
  }
}

}  // namespace

Index QuarterlySeries::find(const Quarter& q) const {
  const auto it = std::lower_bound(quarters.begin(), quarters.end(), q);
  return (it != quarters.end() && *it == q) ? static_cast<Index>(it - quarters.begin()) : -1;
}

Index MonthlyIndicators::find(const YearMonth& m) const {
  const auto it = std::lower_bound(months.begin(), months.end(), m);
  return (it != months.end() && *it == m) ? static_cast<Index>(it - months.begin()) : -1;
}

QuarterlySeries load_gdp_csv(const std::filesystem::path& path, const std::string& value_column) {
  const std::vector<csv::Row> table = csv::parse(csv::read_file(path));
  if (table.empty()) throw DataError(path.string() + ": empty file");
  const std::size_t yc = header_index(table[0], "year", path);
  const std::size_t qc = header_index(table[0], "quarter", path);
  const std::size_t vc = header_index(table[0], value_column, path);
  std::vector<std::pair<Quarter, double>> rows;
  for (std::size_t r = 1; r < table.size(); ++r) {
    const auto& row = table[r];
    const auto year = yc < row.size() ? csv::parse_number(row[yc]) : std::nullopt;
    const auto quarter = qc < row.size() ? parse_quarter_number(row[qc]) : std::nullopt;
    const auto value = vc < row.size() ? csv::parse_number(row[vc]) : std::nullopt;
    if (!year || !quarter || !value || !std::isfinite(*value)) {
      throw DataError(path.string() + ": malformed row on line " + std::to_string(r + 1));
    }
    rows.emplace_back(Quarter{static_cast<int>(*year), *quarter}, *value);
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  QuarterlySeries out;
  out.values.resize(static_cast<Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].first == rows[i - 1].first) {
      throw DataError(path.string() + ": duplicate quarter " + format_quarter(rows[i].first));
    }
    out.quarters.push_back(rows[i].first);
    out.values(static_cast<Index>(i)) = rows[i].second;
  }
  return out;
}

QuarterlySeries growth_from_levels(const QuarterlySeries& levels, GrowthKind kind) {
  const int lag = kind == GrowthKind::YearOnYear ? 4 : 1;
  QuarterlySeries out;
  std::vector<double> values;
  for (std::size_t i = 0; i < levels.quarters.size(); ++i) {
    Quarter base = levels.quarters[i];
    for (int k = 0; k < lag; ++k) base = base.prev();
    const Index j = levels.find(base);
    if (j < 0) continue;
    const double prev = levels.values(j);
    if (prev == 0.0) throw DataError("zero level in " + format_quarter(base));
    out.quarters.push_back(levels.quarters[i]);
    values.push_back(100.0 * (levels.values(static_cast<Index>(i)) - prev) / prev);
  }
  out.values = Eigen::Map<VectorXd>(values.data(), static_cast<Index>(values.size()));
  return out;
}

FactorPaths real_time_factor_paths(const DFMParams& params, const DFMSpec& spec, const ReturnsPanel& returns,
                                   const Date& boundary) {
  const StateSpaceModel model = assemble_state_space(params, spec);
  const FilterResult full = kalman_filter(model, returns.returns, std::nullopt, {false, 0.0});
  FactorPaths paths;
  paths.dates = returns.dates;
  paths.filtered = full.filt_mean.leftCols(spec.n);
  paths.smoothed = paths.filtered;
  const Index cut =
      static_cast<Index>(std::lower_bound(returns.dates.begin(), returns.dates.end(), boundary) - returns.dates.begin());
  if (cut > 0) {
    const FilterResult head = kalman_filter(model, returns.returns.topRows(cut));
    const SmootherResult smooth = kalman_smoother(model, head);
    paths.smoothed.topRows(cut) = smooth.smooth_mean.leftCols(spec.n);
  }
  return paths;
}

MonthlyIndicators monthly_indicators(const std::vector<Date>& dates, const MatrixXd& path) {
  if (static_cast<Index>(dates.size()) != path.rows()) throw UsageError("factor path and calendar differ in length");
  for (std::size_t t = 1; t < dates.size(); ++t)
    if (!(dates[t - 1] < dates[t])) throw DataError("factor dates must be strictly increasing");
  const Index n = path.cols();
  MonthlyIndicators out;
  std::vector<std::pair<Index, Index>> spans;  // [begin, end)
  for (Index t = 0; t < path.rows(); ++t) {
    const YearMonth m = YearMonth::of(dates[static_cast<std::size_t>(t)]);
    if (out.months.empty() || out.months.back() != m) {
      out.months.push_back(m);
      spans.emplace_back(t, t + 1);
    } else {
      spans.back().second = t + 1;
    }
  }
  const Index months = static_cast<Index>(out.months.size());
  out.mean.resize(months, n);
  out.sd.resize(months, n);
  out.days.resize(months);
  for (Index k = 0; k < months; ++k) {
    const auto [begin, end] = spans[static_cast<std::size_t>(k)];
    const Index days = end - begin;
    out.days(k) = static_cast<int>(days);
    const MatrixXd block = path.middleRows(begin, days);
    const Eigen::RowVectorXd mean = block.colwise().mean();
    out.mean.row(k) = mean;
    if (days < 2) {
      out.sd.row(k).setZero();
    } else {
      const MatrixXd centered = block.rowwise() - mean;
      out.sd.row(k) = (centered.colwise().squaredNorm() / static_cast<double>(days - 1)).cwiseSqrt();
    }
  }
  return out;
}

MonthlyIndicators monthly_indicators(const FactorPaths& paths, const Date& boundary) {
  if (paths.smoothed.rows() != paths.filtered.rows() || paths.smoothed.cols() != paths.filtered.cols()) {
    throw UsageError("smoothed and filtered paths differ in shape");
  }
  MatrixXd blended = paths.filtered;
  for (std::size_t t = 0; t < paths.dates.size(); ++t)
    if (paths.dates[t] < boundary) blended.row(static_cast<Index>(t)) = paths.smoothed.row(static_cast<Index>(t));
  return monthly_indicators(paths.dates, blended);
}

BridgeModel fit_ar1(const QuarterlySeries& gdp, const NowcastWindows& windows) {
  check_windows(windows);
  auto none = [](const Quarter&) { return VectorXd(); };
  const Design in = build_design(gdp, windows.in_sample, 0, none);
  const Design out = build_design(gdp, windows.out_sample, 0, none);
  if (in.y.size() < 3) throw DataError("need at least 3 in-sample quarters with an observed previous quarter");
  const VectorXd lag = in.x.col(1);
  if (lag.maxCoeff() == lag.minCoeff()) {
    VectorXd coef = VectorXd::Zero(2);
    coef(0) = in.y.mean();
    BridgeModel model = finish(in, out, coef, {"intercept", "lag1"});
    model.warnings.push_back("lagged growth is constant in sample; the lag coefficient is fixed at zero");
    return model;
  }
  const linalg::LeastSquares fit = linalg::ols(in.x, in.y);
  return finish(in, out, fit.coef, {"intercept", "lag1"});
}

BridgeModel fit_bridge(const QuarterlySeries& gdp, const MonthlyIndicators& indicators, const NowcastWindows& windows,
                       const BridgeOptions& options) {
  check_windows(windows);
  const Index n = indicators.factors();
  const Index extra = 3 * n * 2;
  auto row_extra = [&](const Quarter& q) {
    VectorXd v(extra);
    Index k = 0;
    for (int i = 0; i < 3; ++i) {
      const Index m = indicators.find(q.month(i));
      if (m < 0) {
        throw DataError("no factor indicators for month " + std::to_string(i + 1) + " of " + format_quarter(q));
      }
      for (Index f = 0; f < n; ++f) {
        v(k++) = indicators.mean(m, f);
        v(k++) = indicators.sd(m, f);
      }
    }
    return v;
  };
  Design in = build_design(gdp, windows.in_sample, extra, row_extra);
  Design out = build_design(gdp, windows.out_sample, extra, row_extra);
  if (in.y.size() < 3) throw DataError("need at least 3 in-sample quarters with an observed previous quarter");

  std::vector<std::string> names{"intercept", "lag1"};
  for (int i = 0; i < 3; ++i)
    for (Index f = 0; f < n; ++f)
      for (const char* stat : {"mean", "sd"})
        names.push_back("m" + std::to_string(i + 1) + "_f" + std::to_string(f + 1) + "_" + stat);

  std::vector<Index> active{0, 1};
  for (Index j = 2; j < in.x.cols(); ++j) {
    VectorXd col = in.x.col(j);
    if (options.standardize) {
      const double mean = col.mean();
      const double sd = std::sqrt((col.array() - mean).square().sum() / std::max<double>(1.0, col.size() - 1.0));
      if (sd > 0.0) {
        in.x.col(j) = (in.x.col(j).array() - mean) / sd;
        out.x.col(j) = (out.x.col(j).array() - mean) / sd;
        active.push_back(j);
      }
    } else if (col.cwiseAbs().maxCoeff() > 0.0) {
      active.push_back(j);
    }
  }
  MatrixXd reduced(in.x.rows(), static_cast<Index>(active.size()));
  for (std::size_t k = 0; k < active.size(); ++k) reduced.col(static_cast<Index>(k)) = in.x.col(active[k]);
  const linalg::LeastSquares fit = linalg::ols(reduced, in.y);
  VectorXd coef = VectorXd::Zero(in.x.cols());
  for (std::size_t k = 0; k < active.size(); ++k) coef(active[k]) = fit.coef(static_cast<Index>(k));
  BridgeModel model = finish(in, out, coef, std::move(names));
  if (static_cast<Index>(active.size()) < in.x.cols()) {
    model.warnings.push_back(std::to_string(in.x.cols() - static_cast<Index>(active.size())) +
                             " indicator columns are constant in sample and were given zero weight");
  }
  return model;
}

double rmse(const VectorXd& pred, const VectorXd& actual) {
  if (pred.size() != actual.size()) throw UsageError("prediction and actual lengths differ");
  if (pred.size() == 0) throw UsageError("RMSE of an empty sample");
  return std::sqrt((pred - actual).squaredNorm() / static_cast<double>(pred.size()));
}

}  // namespace dfa
