#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "dfa/error.hpp"
#include "dfa/kalman.hpp"
#include "dfa/linalg.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace dfa;
using namespace dfa::testing;

namespace {

StateSpaceModel scalar_model(double transit, double state_noise, double measure_noise) {
  StateSpaceModel m;
  m.measure = Eigen::MatrixXd::Ones(1, 1);
  m.transit = Eigen::MatrixXd::Constant(1, 1, transit);
  m.state_noise = Eigen::MatrixXd::Constant(1, 1, state_noise);
  m.measure_noise = Eigen::MatrixXd::Constant(1, 1, measure_noise);
  return m;
}

Eigen::MatrixXd with_gaps(Rng& rng, Eigen::MatrixXd obs, double rate) {
  for (Eigen::Index t = 0; t < obs.rows(); ++t)
    for (Eigen::Index s = 0; s < obs.cols(); ++s)
      if (uniform(rng, 0.0, 1.0) < rate) obs(t, s) = std::nan("");
  return obs;
}

}  // namespace

TEST_CASE("a scalar conjugate update halves the variance") {
  const StateSpaceModel m = scalar_model(0.0, 1.0, 1.0);
  const InitialState init{Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Ones(1, 1)};
  const FilterResult f = kalman_filter(m, Eigen::MatrixXd::Constant(1, 1, 2.0), init);
  CHECK(f.pred_cov[0](0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(f.filt_mean(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(f.filt_cov[0](0, 0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("a fully missing row carries the prediction forward at zero likelihood") {
  Rng rng(31);
  const StateSpaceModel m = random_generic_model(rng, 3, 2);
  Eigen::MatrixXd obs = normal_matrix(rng, 4, 2);
  obs.row(2).setConstant(std::nan(""));
  const FilterResult f = kalman_filter(m, obs);
  CHECK(f.filt_mean.row(2) == f.pred_mean.row(2));
  CHECK(f.filt_cov[2] == f.pred_cov[2]);
  CHECK(f.loglik_terms(2) == 0.0);
  CHECK(f.loglik == doctest::Approx(f.loglik_terms.sum()).epsilon(1e-15));
}

TEST_CASE("filter likelihood equals the joint Gaussian density of the stacked observations") {
  Rng rng(32);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::Index d = 1 + rep % 4, S = 1 + rep % 3;
    const StateSpaceModel m = random_generic_model(rng, d, S);
    const Eigen::MatrixXd obs = with_gaps(rng, normal_matrix(rng, 6, S, 1.5), rep % 2 == 0 ? 0.0 : 0.25);
    const Eigen::MatrixXd p0 = stationary_state_covariance(m);
    const double oracle = oracle_loglik(m, obs, Eigen::VectorXd::Zero(d), p0);
    CHECK(std::abs(log_likelihood(m, obs) - oracle) < 1e-8);
    CHECK(std::abs(kalman_filter(m, obs).loglik - oracle) < 1e-8);
  }
}

TEST_CASE("filter likelihood honours an explicit initial state") {
  Rng rng(33);
  const StateSpaceModel m = random_generic_model(rng, 3, 2);
  const Eigen::MatrixXd obs = normal_matrix(rng, 6, 2);
  const Eigen::VectorXd m0 = normal_matrix(rng, 3, 1).col(0);
  const Eigen::MatrixXd a = normal_matrix(rng, 3, 3);
  const Eigen::MatrixXd p0 = a * a.transpose() + Eigen::MatrixXd::Identity(3, 3);
  const double oracle = oracle_loglik(m, obs, m0, p0);
  CHECK(std::abs(log_likelihood(m, obs, InitialState{m0, p0}) - oracle) < 1e-8);
}

TEST_CASE("filter covariances are symmetric, PSD and shrink on update") {
  Rng rng(34);
  const StateSpaceModel m = random_generic_model(rng, 4, 3);
  const Eigen::MatrixXd obs = with_gaps(rng, normal_matrix(rng, 30, 3), 0.2);
  const FilterResult f = kalman_filter(m, obs);
  for (std::size_t t = 0; t < 30; ++t) {
    for (const Eigen::MatrixXd* c : {&f.pred_cov[t], &f.filt_cov[t]}) {
      CHECK((*c - c->transpose()).cwiseAbs().maxCoeff() < 1e-10);
      CHECK(linalg::min_eigenvalue(*c) > -1e-8);
    }
    CHECK(linalg::min_eigenvalue(f.pred_cov[t] - f.filt_cov[t]) > -1e-8);
  }
}

TEST_CASE("smoothed means equal the exact conditional means") {
  Rng rng(35);
  for (int rep = 0; rep < 12; ++rep) {
    const Eigen::Index d = 1 + rep % 4, S = 1 + rep % 3;
    const StateSpaceModel m = random_generic_model(rng, d, S);
    const Eigen::MatrixXd obs = with_gaps(rng, normal_matrix(rng, 5, S), rep % 3 == 0 ? 0.3 : 0.0);
    const OracleSmooth oracle = oracle_smoother(m, obs, Eigen::VectorXd::Zero(d), stationary_state_covariance(m));
    const SmootherResult s = kalman_smoother(m, kalman_filter(m, obs));
    CHECK((s.smooth_mean - oracle.mean).cwiseAbs().maxCoeff() < 1e-8);
    for (std::size_t t = 0; t < 5; ++t) CHECK((s.smooth_cov[t] - oracle.cov[t]).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("smoother ends on the filtered values and is the filter for one step") {
  Rng rng(36);
  const StateSpaceModel m = random_generic_model(rng, 3, 2);
  const FilterResult one = kalman_filter(m, normal_matrix(rng, 1, 2));
  const SmootherResult s1 = kalman_smoother(m, one);
  CHECK(s1.smooth_mean == one.filt_mean);
  CHECK(s1.smooth_cov[0] == one.filt_cov[0]);
  const FilterResult many = kalman_filter(m, normal_matrix(rng, 9, 2));
  const SmootherResult s9 = kalman_smoother(m, many);
  CHECK(s9.smooth_mean.row(8) == many.filt_mean.row(8));
  CHECK(s9.smooth_cov[8] == many.filt_cov[8]);
}

TEST_CASE("without dynamics the future carries no information") {
  Rng rng(37);
  StateSpaceModel m = random_generic_model(rng, 3, 2);
  m.transit.setZero();
  m.state_noise = Eigen::Vector3d(0.5, 1.0, 2.0).asDiagonal();
  const FilterResult f = kalman_filter(m, normal_matrix(rng, 8, 2));
  const SmootherResult s = kalman_smoother(m, f);
  CHECK((s.smooth_mean - f.filt_mean).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("likelihood edge cases") {
  CHECK(log_likelihood(scalar_model(0.5, 1.0, 0.0), Eigen::MatrixXd(0, 1)) == 0.0);
  const double y = 0.7;
  const double expected = -0.5 * (std::log(2.0 * std::numbers::pi) + y * y);
  CHECK(log_likelihood(scalar_model(0.0, 1.0, 0.0), Eigen::MatrixXd::Constant(1, 1, y)) ==
        doctest::Approx(expected).epsilon(1e-15));
}

TEST_CASE("the filter rejects infinite observations and mismatched shapes") {
  const StateSpaceModel m = scalar_model(0.5, 1.0, 0.1);
  CHECK_THROWS_AS(kalman_filter(m, Eigen::MatrixXd::Constant(2, 1, std::numeric_limits<double>::infinity())),
                  UsageError);
  CHECK_THROWS_AS(kalman_filter(m, Eigen::MatrixXd::Zero(3, 2)), UsageError);
}

TEST_CASE("an exact-factor model with no measurement noise filters stably") {
  Rng rng(38);
  const DFMSpec spec{1, 2, 2, 4};
  const StateSpaceModel m = assemble_state_space(random_params(rng, spec), spec);
  const Eigen::MatrixXd obs = with_gaps(rng, normal_matrix(rng, 40, 4), 0.1);
  const double oracle = oracle_loglik(m, obs, Eigen::VectorXd::Zero(m.state_dim()), stationary_state_covariance(m));
  CHECK(std::abs(log_likelihood(m, obs) - oracle) < 1e-6 * std::abs(oracle));
}

TEST_CASE("a unit root falls back to a diffuse start") {
  const InitialState init = default_initial_state(scalar_model(1.0, 1.0, 0.0));
  CHECK(init.cov(0, 0) == kDiffuseVariance);
  CHECK(init.mean(0) == 0.0);
}

TEST_CASE("steady-state gain freezing leaves the likelihood unchanged") {
  Rng rng(39);
  const DFMSpec spec{1, 2, 2, 5};
  const StateSpaceModel m = assemble_state_space(random_params(rng, spec), spec);
  const Eigen::MatrixXd obs = normal_matrix(rng, 400, 5);
  LikelihoodWorkspace ws;
  FilterOptions frozen;
  frozen.steady_state_tol = 1e-14;
  const double exact = log_likelihood(m, obs);
  CHECK(std::abs(log_likelihood(m, obs, std::nullopt, ws, frozen) - exact) < 1e-9 * std::abs(exact));
}
