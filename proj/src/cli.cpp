#include "dfa/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "dfa/criteria.hpp"
#include "dfa/csv.hpp"
#include "dfa/error.hpp"
#include "dfa/estimation.hpp"
#include "dfa/io.hpp"
#include "dfa/nowcast.hpp"
#include "dfa/panel.hpp"
#include "dfa/pca.hpp"
#include "dfa/simulate.hpp"
#include "dfa/validation.hpp"

namespace dfa::cli {

namespace {

namespace fs = std::filesystem;
using Eigen::Index;
using io::Cell;
using io::Table;

struct Common {
  bool json = false;
  unsigned jobs = 1;
  std::string out;
};

fs::path output_dir(const Common& common) {
  if (!common.out.empty()) return common.out;
  if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
  return ".";
}

void emit(const Table& table, const fs::path& dir, const std::string& stem, const Common& common, std::ostream& out) {
  const fs::path path = dir / (stem + (common.json ? ".json" : ".csv"));
  table.write(path, common.json);
  out << "wrote " << path.string() << "\n";
}

Date require_date(const std::string& text, const char* flag) {
  const auto d = parse_date(text);
  if (!d) throw UsageError(std::string(flag) + " expects a YYYY-MM-DD date, got '" + text + "'");
  return *d;
}

QuarterRange parse_range(const std::string& text, const char* flag) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw UsageError(std::string(flag) + " expects FIRST:LAST such as 2015Q1:2020Q4");
  const auto first = parse_quarter(text.substr(0, colon));
  const auto last = parse_quarter(text.substr(colon + 1));
  if (!first || !last) throw UsageError(std::string(flag) + " has a malformed quarter in '" + text + "'");
  if (*last < *first) throw UsageError(std::string(flag) + " ends before it starts");
  return {*first, *last};
}

DatedSeries load_market(const std::string& path, const std::string& column, bool already_returns) {
  DatedSeries market = load_series_csv(path, column);
  return already_returns ? market : returns_from_prices(market, true);
}

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string s;
  for (std::size_t i = 0; i < parts.size(); ++i) s += (i ? sep : "") + parts[i];
  return s;
}

Table dated_table(const std::vector<Date>& dates, const Eigen::MatrixXd& values, const std::string& prefix) {
  Table t;
  t.columns.push_back("date");
  for (Index c = 0; c < values.cols(); ++c) t.columns.push_back(prefix + std::to_string(c + 1));
  for (Index r = 0; r < values.rows(); ++r) {
    std::vector<Cell> row{format_date(dates[static_cast<std::size_t>(r)])};
    for (Index c = 0; c < values.cols(); ++c) row.emplace_back(values(r, c));
    t.add_row(std::move(row));
  }
  return t;
}

// ---------------------------------------------------------------- clean

struct CleanArgs {
  std::string input;
  double threshold = 0.01;
  bool no_center = false;
  bool fraction = false;
};

void run_clean(const CleanArgs& a, const Common& common, std::ostream& out) {
  const PricePanel raw = load_price_csv(a.input);
  const PricePanel kept = filter_missing(raw, a.threshold);
  const ReturnsPanel returns = compute_returns(kept, {!a.no_center, !a.fraction});
  const fs::path dir = output_dir(common);
  write_returns_csv(returns, dir / "returns.csv");
  out << "wrote " << (dir / "returns.csv").string() << "\n";

  Table report;
  report.columns = {"ticker", "missing_fraction", "kept", "mean_return"};
  for (Index j = 0; j < raw.cols(); ++j) {
    const std::string& ticker = raw.tickers[static_cast<std::size_t>(j)];
    const double missing = static_cast<double>(raw.prices.col(j).array().isNaN().count()) / raw.rows();
    const auto it = std::find(returns.tickers.begin(), returns.tickers.end(), ticker);
    const bool is_kept = it != returns.tickers.end();
    const double mean = is_kept ? returns.means(it - returns.tickers.begin()) : std::nan("");
    report.add_row({ticker, missing, is_kept, mean});
  }
  emit(report, dir, "cleaning", common, out);
  out << "kept " << kept.cols() << " of " << raw.cols() << " series over " << returns.rows() << " return dates\n";
  for (Index j : returns.empty_series()) {
    out << "warning: series '" << returns.tickers[static_cast<std::size_t>(j)] << "' has no valid returns\n";
  }
}

// ---------------------------------------------------------------- pca

struct PcaArgs {
  std::string input;
  Index k = 2;
  bool correlation = false;
  bool pairwise = false;
};

void run_pca(const PcaArgs& a, const Common& common, std::ostream& out) {
  const ReturnsPanel returns = load_returns_csv(a.input);
  CovarianceOptions opts;
  opts.correlation = a.correlation;
  opts.missing = a.pairwise ? MissingPolicy::Pairwise : MissingPolicy::ImputeZero;
  const PCAResult pcs = principal_components(returns, a.k, opts);
  const fs::path dir = output_dir(common);

  Table eig;
  eig.columns = {"component", "eigenvalue", "explained", "cumulative"};
  double cumulative = 0.0;
  for (Index j = 0; j < pcs.eigenvalues.size(); ++j) {
    cumulative += pcs.explained_fraction(j);
    eig.add_row({static_cast<long long>(j + 1), pcs.eigenvalues(j), pcs.explained_fraction(j), cumulative});
  }
  emit(eig, dir, "eigenvalues", common, out);

  Table load;
  load.columns.push_back("ticker");
  for (Index j = 0; j < a.k; ++j) load.columns.push_back("pc" + std::to_string(j + 1));
  for (Index i = 0; i < returns.cols(); ++i) {
    std::vector<Cell> row{returns.tickers[static_cast<std::size_t>(i)]};
    for (Index j = 0; j < a.k; ++j) row.emplace_back(pcs.loadvectors(i, j));
    load.add_row(std::move(row));
  }
  emit(load, dir, "loadvectors", common, out);
  emit(dated_table(returns.dates, pcs.components, "pc"), dir, "components", common, out);
}

// ---------------------------------------------------------------- ic

struct IcArgs {
  std::string input;
  Index n_max = 8;
};

void run_ic(const IcArgs& a, const Common& common, std::ostream& out) {
  const ReturnsPanel returns = load_returns_csv(a.input);
  const CriteriaTable table = bai_ng_table(returns, a.n_max);
  Table t;
  t.columns = {"n", "V", "IC1", "IC2", "IC3"};
  for (Index k = 0; k <= table.n_max(); ++k) {
    t.add_row({static_cast<long long>(k), table.residual_mse(k), table.ic1(k), table.ic2(k), table.ic3(k)});
  }
  emit(t, output_dir(common), "criteria", common, out);
  out << "argmin IC1=" << table.argmin_ic1() << " IC2=" << table.argmin_ic2() << " IC3=" << table.argmin_ic3()
      << "\n";
}

// ---------------------------------------------------------------- fit

struct FitArgs {
  std::string input;
  Index n = 1;
  Index p = 1;
  Index q = 0;
  bool auto_order = false;
  std::vector<Index> p_grid{1, 2, 3};
  std::vector<Index> q_grid{0, 1, 2, 3, 4, 5};
  int max_iter = 500;
  bool no_std_errors = false;
};

Table loadings_table(const FittedModel& fit) {
  const Index n = fit.spec.n;
  Table t;
  t.columns.push_back("ticker");
  for (Index j = 1; j <= n; ++j) {
    const std::string s = std::to_string(j);
    for (const char* c : {"beta", "se", "t", "sig"}) t.columns.push_back(std::string(c) + s);
  }
  t.columns.push_back("sigma");
  t.columns.push_back("sigma_se");
  const double nan = std::nan("");
  for (Index i = 0; i < fit.spec.S; ++i) {
    std::vector<Cell> row{fit.tickers[static_cast<std::size_t>(i)]};
    for (Index j = 0; j < n; ++j) {
      const double b = fit.params.beta(i, j);
      const double se = fit.std_errors ? fit.std_errors->beta(i, j) : nan;
      const double tstat = b / se;
      row.emplace_back(b);
      row.emplace_back(se);
      row.emplace_back(tstat);
      row.emplace_back(std::string(std::isfinite(tstat) && std::abs(tstat) > kCritical95 ? "*" : ""));
    }
    row.emplace_back(fit.params.sigma(i));
    row.emplace_back(fit.std_errors ? fit.std_errors->sigma(i) : nan);
    t.add_row(std::move(row));
  }
  return t;
}

void run_fit(const FitArgs& a, const Common& common, std::ostream& out) {
  const ReturnsPanel returns = load_returns_csv(a.input);
  const fs::path dir = output_dir(common);
  FitOptions options;
  options.optimizer.max_iterations = a.max_iter;
  options.compute_std_errors = !a.no_std_errors;

  DFMSpec spec{a.n, a.p, a.q, returns.cols()};
  if (a.auto_order) {
    SelectOptions sel;
    sel.fit = options;
    sel.jobs = common.jobs;
    const OrderSelection chosen = select_order(returns, a.n, a.p_grid, a.q_grid, sel);
    Table t;
    t.columns = {"p", "q", "ok", "converged", "loglik", "bic", "error"};
    for (const auto& c : chosen.candidates) {
      t.add_row({static_cast<long long>(c.p), static_cast<long long>(c.q), c.ok, c.converged,
                 c.ok ? c.loglik : std::nan(""), c.ok ? c.bic : std::nan(""), c.error});
    }
    emit(t, dir, "order_selection", common, out);
    spec.p = chosen.p;
    spec.q = chosen.q;
    out << "selected p=" << spec.p << " q=" << spec.q << "\n";
  }

  const FittedModel fit = fit_mle(returns, spec, options);
  io::write_params({fit.spec, fit.params, fit.tickers}, dir / "params.json");
  out << "wrote " << (dir / "params.json").string() << "\n";
  io::write_factor_csv(fit.dates, fit.factors_filtered, dir / "factors_filtered.csv");
  io::write_factor_csv(fit.dates, fit.factors_smoothed, dir / "factors_smoothed.csv");
  out << "wrote " << (dir / "factors_filtered.csv").string() << "\n";
  out << "wrote " << (dir / "factors_smoothed.csv").string() << "\n";
  emit(loadings_table(fit), dir, "loadings", common, out);

  Table report;
  report.columns = {"n",         "p",          "q",          "S",          "T",          "loglik",
                    "init_loglik", "bic",      "k_params",   "converged",  "iterations", "gradient_norm",
                    "stop_reason", "warnings"};
  const Index k = bic_param_count(spec);
  report.add_row({static_cast<long long>(spec.n), static_cast<long long>(spec.p), static_cast<long long>(spec.q),
                  static_cast<long long>(spec.S), static_cast<long long>(returns.rows()), fit.loglik, fit.init_loglik,
                  bic(fit.loglik, static_cast<double>(k), returns.rows()), static_cast<long long>(k), fit.converged,
                  static_cast<long long>(fit.iterations), fit.gradient_norm, fit.stop_reason,
                  join(fit.warnings, "; ")});
  emit(report, dir, "fit_report", common, out);

  std::ostringstream var;
  for (Index j = 0; j < spec.p; ++j) {
    var << "lambda" << j + 1 << "=";
    const auto& l = fit.params.lambda[static_cast<std::size_t>(j)];
    for (Index r = 0; r < l.rows(); ++r)
      for (Index c = 0; c < l.cols(); ++c) var << (r || c ? "," : "") << csv::format_number(l(r, c));
    var << " ";
  }
  out << "loglik " << csv::format_number(fit.loglik) << " iterations " << fit.iterations
      << (fit.converged ? " converged" : " not converged") << "\n";
  out << var.str() << "\n";
  for (const auto& w : fit.warnings) out << "warning: " << w << "\n";
}

// ---------------------------------------------------------------- capm

struct MarketArgs {
  std::string market;
  std::string column;
  bool market_returns = false;
  double risk_free = 0.0;
};

struct CapmArgs {
  std::string input;
  MarketArgs market;
};

Table capm_table(const ReturnsPanel& returns, const CapmResult& capm) {
  Table t;
  t.columns = {"ticker", "alpha", "beta", "r_squared", "n_obs"};
  for (Index i = 0; i < returns.cols(); ++i) {
    t.add_row({returns.tickers[static_cast<std::size_t>(i)], capm.intercepts(i), capm.betas(i), capm.r_squared(i),
               static_cast<long long>(capm.n_obs(i))});
  }
  return t;
}

void run_capm(const CapmArgs& a, const Common& common, std::ostream& out) {
  const ReturnsPanel returns = load_returns_csv(a.input);
  const DatedSeries market = load_market(a.market.market, a.market.column, a.market.market_returns);
  const CapmResult capm = capm_betas(returns, market, a.market.risk_free);
  emit(capm_table(returns, capm), output_dir(common), "capm", common, out);
}

// ---------------------------------------------------------------- diagnose

struct DiagnoseArgs {
  std::string input;
  std::string params;
  MarketArgs market;
  Index pcs = 2;
};

void run_diagnose(const DiagnoseArgs& a, const Common& common, std::ostream& out) {
  const ReturnsPanel returns = load_returns_csv(a.input);
  const io::ParamsFile file = io::read_params(a.params);
  if (file.spec.S != returns.cols()) throw UsageError("parameter file and returns panel differ in series count");
  const Index n = file.spec.n;
  const FactorEstimates factors = extract_factors(file.params, file.spec, returns.returns);
  const Index k = std::min<Index>(a.pcs, std::min(returns.cols(), returns.rows()));
  const PCAResult pcs = principal_components(returns, k);

  Table t;
  t.columns = {"first", "second", "correlation"};
  std::optional<Eigen::VectorXd> market;
  std::optional<CapmResult> capm;
  if (!a.market.market.empty()) {
    const DatedSeries series = load_market(a.market.market, a.market.column, a.market.market_returns);
    market = align(series, returns.dates);
    capm = capm_betas(returns, series, a.market.risk_free);
  }
  for (Index j = 0; j < n; ++j) {
    const std::string f = "factor" + std::to_string(j + 1);
    if (market) t.add_row({f, std::string("market"), correlation(factors.smoothed.col(j), *market)});
    for (Index c = 0; c < k; ++c) {
      t.add_row({f, "pc" + std::to_string(c + 1), correlation(factors.smoothed.col(j), pcs.components.col(c))});
    }
  }
  if (market) {
    for (Index c = 0; c < k; ++c)
      t.add_row({"pc" + std::to_string(c + 1), std::string("market"), correlation(pcs.components.col(c), *market)});
    for (Index j = 0; j < n; ++j) {
      t.add_row({"beta" + std::to_string(j + 1), std::string("capm_beta"),
                 correlation(file.params.beta.col(j), capm->betas)});
    }
  }
  const fs::path dir = output_dir(common);
  emit(t, dir, "correlations", common, out);
  if (capm) emit(capm_table(returns, *capm), dir, "capm", common, out);
}

// ---------------------------------------------------------------- nowcast

struct NowcastArgs {
  std::string gdp;
  std::string gdp_column = "growth";
  bool levels = false;
  std::string growth = "yoy";
  std::string params;
  std::string input;
  std::string smoothed;
  std::string filtered;
  std::string boundary;
  std::string train;
  std::string test;
  bool standardize = false;
};

void run_nowcast(const NowcastArgs& a, const Common& common, std::ostream& out) {
  const NowcastWindows windows{parse_range(a.train, "--train"), parse_range(a.test, "--test")};
  const Quarter first_test = windows.out_sample.first;
  const YearMonth first_month = first_test.month(0);
  const Date boundary = a.boundary.empty()
                            ? Date{std::chrono::year{first_month.year},
                                   std::chrono::month{static_cast<unsigned>(first_month.month)}, std::chrono::day{1}}
                            : require_date(a.boundary, "--boundary");

  QuarterlySeries gdp = load_gdp_csv(a.gdp, a.gdp_column);
  if (a.levels) {
    if (a.growth != "yoy" && a.growth != "qoq") throw UsageError("--growth must be yoy or qoq");
    gdp = growth_from_levels(gdp, a.growth == "yoy" ? GrowthKind::YearOnYear : GrowthKind::QuarterOnQuarter);
  }

  FactorPaths paths;
  const bool from_params = !a.params.empty();
  const bool from_files = !a.smoothed.empty() || !a.filtered.empty();
  if (from_params == from_files) {
    throw UsageError("give either --params with --input, or both --factors-smoothed and --factors-filtered");
  }
  if (from_params) {
    if (a.input.empty()) throw UsageError("--params needs --input");
    const ReturnsPanel returns = load_returns_csv(a.input);
    const io::ParamsFile file = io::read_params(a.params);
    if (file.spec.S != returns.cols()) throw UsageError("parameter file and returns panel differ in series count");
    paths = real_time_factor_paths(file.params, file.spec, returns, boundary);
  } else {
    if (a.smoothed.empty() || a.filtered.empty()) throw UsageError("both factor files are required");
    const io::DatedMatrix s = io::read_factor_csv(a.smoothed);
    const io::DatedMatrix f = io::read_factor_csv(a.filtered);
    if (s.dates != f.dates || s.values.cols() != f.values.cols()) {
      throw DataError("smoothed and filtered factor files cover different dates or factor counts");
    }
    paths = {s.dates, s.values, f.values};
  }

  const MonthlyIndicators indicators = monthly_indicators(paths, boundary);
  const BridgeModel ar1 = fit_ar1(gdp, windows);
  const BridgeModel bridge = fit_bridge(gdp, indicators, windows, {a.standardize});
  const fs::path dir = output_dir(common);

  Table ind;
  ind.columns = {"month", "days"};
  for (Index f = 1; f <= indicators.factors(); ++f) {
    ind.columns.push_back("f" + std::to_string(f) + "_mean");
    ind.columns.push_back("f" + std::to_string(f) + "_sd");
  }
  for (std::size_t m = 0; m < indicators.months.size(); ++m) {
    char label[16];
    std::snprintf(label, sizeof label, "%04d-%02d", indicators.months[m].year, indicators.months[m].month);
    std::vector<Cell> row{std::string(label), static_cast<long long>(indicators.days(static_cast<Index>(m)))};
    for (Index f = 0; f < indicators.factors(); ++f) {
      row.emplace_back(indicators.mean(static_cast<Index>(m), f));
      row.emplace_back(indicators.sd(static_cast<Index>(m), f));
    }
    ind.add_row(std::move(row));
  }
  emit(ind, dir, "indicators", common, out);

  Table pred;
  pred.columns = {"quarter", "window", "actual", "ar1", "bridge"};
  for (std::size_t i = 0; i < ar1.in_quarters.size(); ++i) {
    const Index r = static_cast<Index>(i);
    pred.add_row({format_quarter(ar1.in_quarters[i]), std::string("in"), ar1.in_actual(r), ar1.in_pred(r),
                  bridge.in_pred(r)});
  }
  for (std::size_t i = 0; i < ar1.out_quarters.size(); ++i) {
    const Index r = static_cast<Index>(i);
    pred.add_row({format_quarter(ar1.out_quarters[i]), std::string("out"), ar1.out_actual(r), ar1.out_pred(r),
                  bridge.out_pred(r)});
  }
  emit(pred, dir, "predictions", common, out);

  Table coef;
  coef.columns = {"term", "ar1", "bridge"};
  for (std::size_t i = 0; i < bridge.names.size(); ++i) {
    const Index r = static_cast<Index>(i);
    coef.add_row({bridge.names[i], r < ar1.coefficients.size() ? ar1.coefficients(r) : std::nan(""),
                  bridge.coefficients(r)});
  }
  emit(coef, dir, "coefficients", common, out);

  Table summary;
  summary.columns = {"model", "in_sample_rmse", "out_sample_rmse", "in_improvement_pct", "out_improvement_pct"};
  auto improvement = [](double base, double v) { return 100.0 * (base - v) / base; };
  summary.add_row({std::string("AR(1)"), ar1.in_sample_rmse, ar1.out_sample_rmse, 0.0, 0.0});
  summary.add_row({std::string("AR(1) w/ F_t"), bridge.in_sample_rmse, bridge.out_sample_rmse,
                   improvement(ar1.in_sample_rmse, bridge.in_sample_rmse),
                   improvement(ar1.out_sample_rmse, bridge.out_sample_rmse)});
  emit(summary, dir, "rmse", common, out);
  out << "AR(1) rmse in " << csv::format_number(ar1.in_sample_rmse) << " out "
      << csv::format_number(ar1.out_sample_rmse) << "; bridge rmse in " << csv::format_number(bridge.in_sample_rmse)
      << " out " << csv::format_number(bridge.out_sample_rmse) << "\n";
  for (const auto& w : bridge.warnings) out << "warning: " << w << "\n";
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string params;
  Index t_obs = 1500;
  std::uint64_t seed = 1;
  Index burn_in = 500;
  bool stationary_start = false;
  std::string start_date = "2015-01-01";
};

Date previous_weekday(const Date& d) {
  std::chrono::sys_days day{d};
  do {
    day -= std::chrono::days{1};
  } while (std::chrono::weekday{day}.c_encoding() == 0 || std::chrono::weekday{day}.c_encoding() == 6);
  return Date{day};
}

void run_simulate(const SimulateArgs& a, const Common& common, std::ostream& out) {
  const io::ParamsFile file = io::read_params(a.params);
  if (a.t_obs < 1) throw UsageError("--t must be positive");
  if (a.burn_in < 0) throw UsageError("--burn-in must be nonnegative");
  SimOptions options;
  options.burn_in = a.burn_in;
  options.stationary_start = a.stationary_start;
  options.start_date = require_date(a.start_date, "--start-date");
  SimOutput sim = simulate_dfm(file.params, file.spec, a.t_obs, a.seed, options);
  if (!file.tickers.empty()) sim.returns.tickers = file.tickers;
  const fs::path dir = output_dir(common);
  write_returns_csv(sim.returns, dir / "returns.csv");
  out << "wrote " << (dir / "returns.csv").string() << "\n";

  PricePanel prices;
  prices.tickers = sim.returns.tickers;
  prices.dates.push_back(previous_weekday(sim.returns.dates.front()));
  prices.dates.insert(prices.dates.end(), sim.returns.dates.begin(), sim.returns.dates.end());
  prices.prices.resize(a.t_obs + 1, file.spec.S);
  prices.prices.row(0).setConstant(100.0);
  for (Index t = 0; t < a.t_obs; ++t) {
    prices.prices.row(t + 1) = prices.prices.row(t).array() * (1.0 + sim.returns.returns.row(t).array() / 100.0);
  }
  Table pt;
  pt.columns.push_back("date");
  pt.columns.insert(pt.columns.end(), prices.tickers.begin(), prices.tickers.end());
  for (Index t = 0; t <= a.t_obs; ++t) {
    std::vector<Cell> row{format_date(prices.dates[static_cast<std::size_t>(t)])};
    for (Index i = 0; i < file.spec.S; ++i) row.emplace_back(prices.prices(t, i));
    pt.add_row(std::move(row));
  }
  io::write_text(dir / "prices.csv", pt.to_csv());
  out << "wrote " << (dir / "prices.csv").string() << "\n";
  io::write_factor_csv(sim.returns.dates, sim.true_factors, dir / "factors_true.csv");
  out << "wrote " << (dir / "factors_true.csv").string() << "\n";
}

std::string error_line(const char* kind, const std::string& message, int code) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  j["exit_code"] = code;
  return j.dump();
}

void add_market_options(CLI::App* cmd, MarketArgs& m, bool required) {
  auto* opt = cmd->add_option("--market", m.market, "Market index CSV (date, value)")->check(CLI::ExistingFile);
  if (required) opt->required();
  cmd->add_option("--market-column", m.column, "Value column of the market CSV (default: second column)");
  cmd->add_flag("--market-returns", m.market_returns, "Market file already holds percentage returns, not levels");
  cmd->add_option("--risk-free", m.risk_free, "Risk-free rate per period, percent points");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dynamic factor analysis of return panels", "dfa"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "dfa 1.0.0");
  Common common;
  app.add_flag("--json", common.json, "Write tables as JSON instead of CSV");
  app.add_option("--jobs", common.jobs, "Concurrent model fits during order selection")->check(CLI::Range(1u, 256u));

  auto out_option = [&](CLI::App* cmd) {
    cmd->add_option("--out", common.out, "Output directory (default: $DFA_OUT_DIR or .)");
  };

  CleanArgs clean;
  auto* c_clean = app.add_subcommand("clean", "Filter a price panel and compute percentage returns");
  c_clean->add_option("--input", clean.input, "Price CSV")->required()->check(CLI::ExistingFile);
  c_clean->add_option("--threshold", clean.threshold, "Maximum missing fraction per series")
      ->check(CLI::Range(0.0, 1.0));
  c_clean->add_flag("--no-center", clean.no_center, "Keep series means");
  c_clean->add_flag("--fraction", clean.fraction, "Fractional instead of percentage returns");
  out_option(c_clean);

  PcaArgs pca;
  auto* c_pca = app.add_subcommand("pca", "Principal components of a returns panel");
  c_pca->add_option("--input", pca.input, "Returns CSV")->required()->check(CLI::ExistingFile);
  c_pca->add_option("--k", pca.k, "Number of components")->check(CLI::PositiveNumber);
  c_pca->add_flag("--correlation", pca.correlation, "Decompose the correlation matrix");
  c_pca->add_flag("--pairwise", pca.pairwise, "Pairwise-complete covariance");
  out_option(c_pca);

  IcArgs ic;
  auto* c_ic = app.add_subcommand("ic", "Information criteria for the number of factors");
  c_ic->add_option("--input", ic.input, "Returns CSV")->required()->check(CLI::ExistingFile);
  c_ic->add_option("--n-max", ic.n_max, "Largest factor count")->check(CLI::PositiveNumber);
  out_option(c_ic);

  FitArgs fit;
  auto* c_fit = app.add_subcommand("fit", "Maximum-likelihood fit of a dynamic factor model");
  c_fit->add_option("--input", fit.input, "Returns CSV")->required()->check(CLI::ExistingFile);
  c_fit->add_option("--n", fit.n, "Common factors")->check(CLI::PositiveNumber);
  auto* p_opt = c_fit->add_option("--p", fit.p, "Factor VAR order")->check(CLI::PositiveNumber);
  auto* q_opt = c_fit->add_option("--q", fit.q, "Idiosyncratic AR order")->check(CLI::NonNegativeNumber);
  auto* auto_opt = c_fit->add_flag("--auto-order", fit.auto_order, "Choose p and q by BIC over the grids");
  c_fit->add_option("--p-grid", fit.p_grid, "Candidate p values")->delimiter(',')->check(CLI::PositiveNumber);
  c_fit->add_option("--q-grid", fit.q_grid, "Candidate q values")->delimiter(',')->check(CLI::NonNegativeNumber);
  c_fit->add_option("--max-iter", fit.max_iter, "Optimizer iteration limit")->check(CLI::PositiveNumber);
  c_fit->add_flag("--no-std-errors", fit.no_std_errors, "Skip the Hessian-based standard errors");
  auto_opt->excludes(p_opt)->excludes(q_opt);
  out_option(c_fit);

  CapmArgs capm;
  auto* c_capm = app.add_subcommand("capm", "CAPM betas against a market index");
  c_capm->add_option("--input", capm.input, "Returns CSV")->required()->check(CLI::ExistingFile);
  add_market_options(c_capm, capm.market, true);
  out_option(c_capm);

  DiagnoseArgs diag;
  auto* c_diag = app.add_subcommand("diagnose", "Correlate fitted factors with the index, PCs and CAPM betas");
  c_diag->add_option("--input", diag.input, "Returns CSV")->required()->check(CLI::ExistingFile);
  c_diag->add_option("--params", diag.params, "Parameter JSON from fit")->required()->check(CLI::ExistingFile);
  c_diag->add_option("--pcs", diag.pcs, "Principal components to compare")->check(CLI::PositiveNumber);
  add_market_options(c_diag, diag.market, false);
  out_option(c_diag);

  NowcastArgs now;
  auto* c_now = app.add_subcommand("nowcast", "Bridge-regression GDP nowcast from monthly factor indicators");
  c_now->add_option("--gdp", now.gdp, "GDP CSV with year, quarter and value columns")
      ->required()
      ->check(CLI::ExistingFile);
  c_now->add_option("--gdp-column", now.gdp_column, "Value column of the GDP CSV");
  c_now->add_flag("--levels", now.levels, "GDP column holds levels; convert to growth");
  c_now->add_option("--growth", now.growth, "Growth definition for --levels: yoy or qoq")
      ->check(CLI::IsMember({"yoy", "qoq"}));
  c_now->add_option("--params", now.params, "Parameter JSON; factors are re-estimated without look-ahead")
      ->check(CLI::ExistingFile);
  c_now->add_option("--input", now.input, "Returns CSV used with --params")->check(CLI::ExistingFile);
  c_now->add_option("--factors-smoothed", now.smoothed, "Smoothed factor CSV")->check(CLI::ExistingFile);
  c_now->add_option("--factors-filtered", now.filtered, "Filtered factor CSV")->check(CLI::ExistingFile);
  c_now->add_option("--boundary", now.boundary, "First out-of-sample date (default: start of --test)");
  c_now->add_option("--train", now.train, "In-sample quarters, e.g. 2015Q1:2020Q4")->required();
  c_now->add_option("--test", now.test, "Out-of-sample quarters, e.g. 2021Q1:2022Q4")->required();
  c_now->add_flag("--standardize", now.standardize, "z-score indicators with in-sample moments");
  out_option(c_now);

  SimulateArgs sim;
  auto* c_sim = app.add_subcommand("simulate", "Simulate returns from a parameter file");
  c_sim->add_option("--params", sim.params, "Parameter JSON")->required()->check(CLI::ExistingFile);
  c_sim->add_option("--t", sim.t_obs, "Number of return dates")->check(CLI::PositiveNumber);
  c_sim->add_option("--seed", sim.seed, "Random seed");
  c_sim->add_option("--burn-in", sim.burn_in, "Discarded initial steps")->check(CLI::NonNegativeNumber);
  c_sim->add_flag("--stationary-start", sim.stationary_start, "Start from a stationary draw");
  c_sim->add_option("--start-date", sim.start_date, "First return date (weekdays follow)");
  out_option(c_sim);

  if (!args.empty() && !args.front().empty() && args.front()[0] != '-') {
    bool known = false;
    for (const auto* sub : app.get_subcommands({})) known = known || sub->get_name() == args.front();
    if (!known) {
      err << error_line("usage", "unknown subcommand '" + args.front() + "'", kExitUsage) << "\n";
      return kExitUsage;
    }
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    std::ostringstream help, error;
    const int code = app.exit(e, help, error);
    if (code == 0) {
      out << help.str();
      return kExitOk;
    }
    err << error_line("usage", e.what(), kExitUsage) << "\n";
    return kExitUsage;
  }

  try {
    if (c_clean->parsed()) run_clean(clean, common, out);
    if (c_pca->parsed()) run_pca(pca, common, out);
    if (c_ic->parsed()) run_ic(ic, common, out);
    if (c_fit->parsed()) run_fit(fit, common, out);
    if (c_capm->parsed()) run_capm(capm, common, out);
    if (c_diag->parsed()) run_diagnose(diag, common, out);
    if (c_now->parsed()) run_nowcast(now, common, out);
    if (c_sim->parsed()) run_simulate(sim, common, out);
  } catch (const UsageError& e) {
    err << error_line("usage", e.what(), kExitUsage) << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    err << error_line("data", e.what(), kExitData) << "\n";
    return kExitData;
  } catch (const NumericalError& e) {
    err << error_line("numerical", e.what(), kExitNumerical) << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << error_line("internal", e.what(), 1) << "\n";
    return 1;
  }
  return kExitOk;
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace dfa::cli
