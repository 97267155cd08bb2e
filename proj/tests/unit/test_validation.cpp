#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "dfa/error.hpp"
#include "dfa/estimation.hpp"
#include "dfa/simulate.hpp"
#include "dfa/validation.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace dfa;
using namespace dfa::testing;

namespace {

DatedSeries market_like(const ReturnsPanel& panel, const Eigen::VectorXd& values) {
  return DatedSeries{"market", panel.dates, values};
}

}  // namespace

TEST_CASE("a stock identical to the market has unit beta and unit R squared") {
  Rng rng(61);
  const Eigen::VectorXd m = normal_matrix(rng, 120, 1).col(0);
  const ReturnsPanel panel = panel_from_matrix(m);
  const CapmResult r = capm_betas(panel, market_like(panel, m));
  CHECK(std::abs(r.betas(0) - 1.0) < 1e-12);
  CHECK(std::abs(r.r_squared(0) - 1.0) < 1e-12);
  CHECK(r.n_obs(0) == 120);
}

TEST_CASE("a stock at twice the market plus small noise has beta near 2") {
  Rng rng(62);
  const Eigen::Index T = 500;
  const Eigen::VectorXd m = normal_matrix(rng, T, 1).col(0);
  const double noise_sd = 0.05;
  const Eigen::VectorXd s = 2.0 * m + normal_matrix(rng, T, 1, noise_sd).col(0);
  const ReturnsPanel panel = panel_from_matrix(s);
  const CapmResult r = capm_betas(panel, market_like(panel, m), 0.01);
  const double centered_ss = (m.array() - m.mean()).square().sum();
  const double ols_sd = noise_sd / std::sqrt(centered_ss);
  CHECK(std::abs(r.betas(0) - 2.0) < 3.0 * ols_sd);
  CHECK(r.risk_free == 0.01);
}

TEST_CASE("capm adds back the removed means before regressing") {
  Rng rng(63);
  const Eigen::VectorXd m = normal_matrix(rng, 200, 1).col(0).array() + 0.3;
  const Eigen::VectorXd s = 1.5 * m.array() + 0.2;
  const ReturnsPanel centered = centered_panel(s);
  const CapmResult r = capm_betas(centered, market_like(centered, m), 0.1);
  CHECK(r.betas(0) == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(r.intercepts(0) == doctest::Approx(0.2 + 0.1 * 1.5 - 0.1).epsilon(1e-10));
}

TEST_CASE("capm aligns by date and needs enough overlap") {
  Rng rng(64);
  const ReturnsPanel panel = panel_from_matrix(normal_matrix(rng, 10, 2));
  DatedSeries short_market{"m", {panel.dates[0], panel.dates[1]}, Eigen::Vector2d(0.1, 0.2)};
  CHECK_THROWS_AS(capm_betas(panel, short_market), DataError);
  DatedSeries partial{"m", panel.dates, normal_matrix(rng, 10, 1).col(0)};
  partial.values(3) = std::nan("");
  CHECK(capm_betas(panel, partial).n_obs(1) == 9);
}

TEST_CASE("correlation of a series with itself and its negation") {
  Rng rng(65);
  const Eigen::VectorXd a = normal_matrix(rng, 50, 1).col(0);
  CHECK(correlation(a, a) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(correlation(a, -a) == doctest::Approx(-1.0).epsilon(1e-15));
}

TEST_CASE("correlation matches the textbook formula") {
  Rng rng(66);
  for (int rep = 0; rep < 10; ++rep) {
    const Eigen::MatrixXd x = normal_matrix(rng, 100, 2);
    CHECK(std::abs(correlation(x.col(0), x.col(1)) - brute_force_correlation(x.col(0), x.col(1))) < 1e-12);
  }
}

TEST_CASE("correlation skips incomplete pairs and rejects degenerate input") {
  const Eigen::VectorXd a = (Eigen::VectorXd(5) << 1, 2, std::nan(""), 4, 5).finished();
  const Eigen::VectorXd b = (Eigen::VectorXd(5) << 2, 4, 100, 8, std::nan("")).finished();
  CHECK(correlation(a, b) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK_THROWS_AS(correlation(Eigen::VectorXd::Ones(4), Eigen::VectorXd::LinSpaced(4, 0, 1)), DataError);
  CHECK_THROWS_AS(correlation(Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1)), DataError);
}

TEST_CASE("an exactly linear response has unit R squared") {
  Rng rng(67);
  const Eigen::MatrixXd x = normal_matrix(rng, 40, 2);
  const Eigen::VectorXd y = (0.5 + 2.0 * x.col(0).array() - 1.0 * x.col(1).array()).matrix();
  const Regression r = regress(y, x);
  CHECK(r.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(r.coef(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.coef(1) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(r.coef(2) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(r.n_obs == 40);
}

TEST_CASE("a response orthogonal to the regressor has zero slope") {
  const Eigen::VectorXd x = (Eigen::VectorXd(4) << -1, 1, -1, 1).finished();
  const Eigen::VectorXd y = (Eigen::VectorXd(4) << -1, -1, 1, 1).finished();
  const Regression r = regress(y, x);
  CHECK(std::abs(r.coef(1)) < 1e-14);
  CHECK(std::abs(r.r_squared) < 1e-14);
}

TEST_CASE("regress rejects a rank-deficient design") {
  Eigen::MatrixXd x(5, 2);
  x.col(0) = Eigen::VectorXd::LinSpaced(5, 0, 4);
  x.col(1) = 2.0 * x.col(0);
  CHECK_THROWS_AS(regress(Eigen::VectorXd::LinSpaced(5, 1, 2), x), NumericalError);
}

TEST_CASE("a one-factor smoothed path is nearly spanned by the two-factor paths") {
  const DFMSpec two{2, 1, 0, 8};
  Rng rng(68);
  DFMParams truth = random_params(rng, two);
  truth.beta.col(0) *= 2.0;
  const ReturnsPanel panel = centered_panel(simulate_dfm(truth, two, 800, 21).returns.returns);
  FitOptions options;
  options.compute_std_errors = false;
  const FittedModel f1 = fit_mle(panel, {1, 1, 0, 8}, options);
  const FittedModel f2 = fit_mle(panel, two, options);
  const Regression r = regress(f1.factors_smoothed.col(0), f2.factors_smoothed);
  CHECK(r.r_squared > 0.95);
}

TEST_CASE("series files load, sort and convert to returns") {
  const auto path = std::filesystem::temp_directory_path() / "dfa_unit_series.csv";
  {
    std::ofstream out(path);
    out << "date,close,volume\n2020-01-03,110,5\n2020-01-02,100,4\n2020-01-06,99,7\n";
  }
  const DatedSeries s = load_series_csv(path);
  CHECK(s.name == "close");
  CHECK(format_date(s.dates.front()) == "2020-01-02");
  CHECK(load_series_csv(path, "volume").values(0) == 4.0);
  CHECK_THROWS_AS(load_series_csv(path, "nope"), DataError);
  const DatedSeries r = returns_from_prices(s);
  REQUIRE(r.values.size() == 2);
  CHECK(r.values(0) == doctest::Approx(10.0).epsilon(1e-14));
  CHECK(r.values(1) == doctest::Approx(-10.0).epsilon(1e-14));
  CHECK(r.dates.front() == s.dates[1]);
  const Eigen::VectorXd aligned = align(r, {s.dates[0], s.dates[2]});
  CHECK(std::isnan(aligned(0)));
  CHECK(aligned(1) == r.values(1));
  {
    std::ofstream out(path);
    out << "date,close\n2020-01-03,110\n2020-01-03,100\n";
  }
  CHECK_THROWS_AS(load_series_csv(path), DataError);
  std::filesystem::remove(path);
}
