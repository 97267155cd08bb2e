#include "dfa/validation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "dfa/error.hpp"
#include "dfa/linalg.hpp"

namespace dfa {

DatedSeries load_series_csv(const std::filesystem::path& path, const std::string& column) {
  const std::vector<csv::Row> table = csv::parse(csv::read_file(path));
  if (table.empty() || table[0].size() < 2) throw DataError(path.string() + ": expected a date column and a value column");
  std::size_t col = 1;
  if (!column.empty()) {
    const auto& header = table[0];
    const auto it = std::find_if(header.begin(), header.end(), [&](const auto& h) { return csv::trim(h) == column; });
    if (it == header.end()) throw DataError(path.string() + ": no column named '" + column + "'");
    col = static_cast<std::size_t>(it - header.begin());
  }
  std::vector<std::pair<Date, double>> rows;
  for (std::size_t r = 1; r < table.size(); ++r) {
    const auto& row = table[r];
    const auto date = parse_date(csv::trim(row[0]));
    if (!date) throw DataError(path.string() + ": bad date on line " + std::to_string(r + 1));
    const auto value = col < row.size() ? csv::parse_number(row[col]) : std::nullopt;
    rows.emplace_back(*date, value ? *value : kMissing);
  }
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  DatedSeries out;
  out.name = csv::trim(table[0][col]);
  out.values.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i > 0 && rows[i].first == rows[i - 1].first) {
      throw DataError(path.string() + ": duplicate date " + format_date(rows[i].first));
    }
    out.dates.push_back(rows[i].first);
    out.values(static_cast<Eigen::Index>(i)) = rows[i].second;
  }
  return out;
}

DatedSeries returns_from_prices(const DatedSeries& prices, bool percent) {
  const Eigen::Index T = prices.values.size();
  if (T < 2) throw DataError("need at least two levels to form returns");
  DatedSeries out;
  out.name = prices.name;
  out.dates.assign(prices.dates.begin() + 1, prices.dates.end());
  out.values.resize(T - 1);
  const double scale = percent ? 100.0 : 1.0;
  for (Eigen::Index t = 1; t < T; ++t) {
    const double prev = prices.values(t - 1);
    const double cur = prices.values(t);
    out.values(t - 1) = (is_missing(prev) || is_missing(cur) || prev == 0.0) ? kMissing : scale * (cur - prev) / prev;
  }
  return out;
}

Eigen::VectorXd align(const DatedSeries& series, const std::vector<Date>& dates) {
  std::map<Date, double> lookup;
  for (std::size_t i = 0; i < series.dates.size(); ++i)
    lookup.emplace(series.dates[i], series.values(static_cast<Eigen::Index>(i)));
  Eigen::VectorXd out(static_cast<Eigen::Index>(dates.size()));
  for (std::size_t i = 0; i < dates.size(); ++i) {
    const auto it = lookup.find(dates[i]);
    out(static_cast<Eigen::Index>(i)) = it == lookup.end() ? kMissing : it->second;
  }
  return out;
}

double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw UsageError("correlation needs series of equal length");
  double sa = 0.0, sb = 0.0;
  Eigen::Index count = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (is_missing(a(i)) || is_missing(b(i))) continue;
    sa += a(i);
    sb += b(i);
    ++count;
  }
  if (count < 2) throw DataError("correlation needs at least two complete pairs");
  const double ma = sa / static_cast<double>(count);
  const double mb = sb / static_cast<double>(count);
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (is_missing(a(i)) || is_missing(b(i))) continue;
    const double da = a(i) - ma;
    const double db = b(i) - mb;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (!(saa > 0.0) || !(sbb > 0.0)) throw DataError("correlation is undefined for a constant series");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

Regression regress(const Eigen::VectorXd& y, const Eigen::MatrixXd& x) {
  if (x.rows() != y.size()) throw UsageError("regressors and response differ in length");
  std::vector<Eigen::Index> rows;
  for (Eigen::Index t = 0; t < y.size(); ++t) {
    bool ok = !is_missing(y(t));
    for (Eigen::Index j = 0; j < x.cols() && ok; ++j) ok = !is_missing(x(t, j));
    if (ok) rows.push_back(t);
  }
  const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd design(m, x.cols() + 1);
  Eigen::VectorXd target(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    design(i, 0) = 1.0;
    design.row(i).tail(x.cols()) = x.row(rows[static_cast<std::size_t>(i)]);
    target(i) = y(rows[static_cast<std::size_t>(i)]);
  }
  const linalg::LeastSquares fit = linalg::ols(design, target);
  Regression out;
  out.coef = fit.coef;
  out.n_obs = m;
  const double tss = (target.array() - target.mean()).square().sum();
  out.r_squared = tss > 0.0 ? std::clamp(1.0 - fit.residuals.squaredNorm() / tss, 0.0, 1.0) : 1.0;
  return out;
}

CapmResult capm_betas(const ReturnsPanel& stocks, const DatedSeries& market, double risk_free) {
  const Eigen::VectorXd m = align(market, stocks.dates);
  const Eigen::Index S = stocks.cols();
  CapmResult out;
  out.risk_free = risk_free;
  out.betas.resize(S);
  out.intercepts.resize(S);
  out.r_squared.resize(S);
  out.n_obs.resize(S);
  const Eigen::VectorXd excess_market = m.array() - risk_free;
  for (Eigen::Index i = 0; i < S; ++i) {
    const double mean = stocks.means.size() == S ? stocks.means(i) : 0.0;
    const Eigen::VectorXd excess = stocks.returns.col(i).array() + (mean - risk_free);
    Eigen::Index aligned = 0;
    for (Eigen::Index t = 0; t < excess.size(); ++t)
      if (!is_missing(excess(t)) && !is_missing(excess_market(t))) ++aligned;
    if (aligned < 3) {
      throw DataError("series '" + stocks.tickers[static_cast<std::size_t>(i)] +
                      "' has fewer than 3 observations aligned with the market");
    }
    const Regression fit = regress(excess, excess_market);
    out.intercepts(i) = fit.coef(0);
    out.betas(i) = fit.coef(1);
    out.r_squared(i) = fit.r_squared;
    out.n_obs(i) = static_cast<int>(fit.n_obs);
  }
  return out;
}

}  // namespace dfa
