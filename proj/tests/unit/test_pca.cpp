#include <doctest.h>

#include <cmath>

#include "dfa/error.hpp"
#include "dfa/pca.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace dfa;
using namespace dfa::testing;

TEST_CASE("two identical series give a covariance grid with equal entries") {
  Rng rng(1);
  const Eigen::VectorXd x = normal_matrix(rng, 40, 1).col(0);
  Eigen::MatrixXd data(40, 2);
  data << x, x;
  const Eigen::MatrixXd c = sample_covariance(centered_panel(data));
  CHECK(c(0, 1) == doctest::Approx(c(0, 0)).epsilon(1e-14));
  CHECK(c(1, 0) == doctest::Approx(c(1, 1)).epsilon(1e-14));
  CHECK(c(0, 0) == doctest::Approx(c(1, 1)).epsilon(1e-14));
}

TEST_CASE("a series and its negation have off-diagonals equal to minus the variance") {
  Rng rng(2);
  const Eigen::VectorXd x = normal_matrix(rng, 30, 1).col(0);
  Eigen::MatrixXd data(30, 2);
  data << x, -x;
  const Eigen::MatrixXd c = sample_covariance(centered_panel(data));
  CHECK(c(0, 1) == doctest::Approx(-c(0, 0)).epsilon(1e-14));
}

TEST_CASE("covariance of a 5x3 panel matches the double-loop computation") {
  Rng rng(3);
  const Eigen::MatrixXd raw = normal_matrix(rng, 5, 3);
  const Eigen::MatrixXd c = sample_covariance(raw);
  const Eigen::MatrixXd oracle = brute_force_covariance(raw);
  CHECK((c - oracle).cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::MatrixXd from_panel = sample_covariance(centered_panel(raw));
  CHECK((from_panel - oracle).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("covariance rejects a panel with an empty series") {
  Eigen::MatrixXd raw(4, 2);
  raw << 1, std::nan(""), 2, std::nan(""), 3, std::nan(""), 4, std::nan("");
  CHECK_THROWS_AS(sample_covariance(panel_from_matrix(raw)), DataError);
  CHECK_THROWS_AS(sample_covariance(panel_from_matrix(Eigen::MatrixXd::Ones(1, 2))), DataError);
}

TEST_CASE("a rank-one panel is explained entirely by its first component") {
  Rng rng(4);
  const Eigen::VectorXd f = normal_matrix(rng, 200, 1).col(0);
  const Eigen::VectorXd c = (Eigen::VectorXd(4) << 1.0, -2.0, 0.5, 3.0).finished();
  const Eigen::MatrixXd data = f * c.transpose();
  const PCAResult r = principal_components(centered_panel(data), 1);
  CHECK(r.explained_fraction(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(brute_force_correlation(r.components.col(0), f)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(pca_residual_mse(centered_panel(data), 1) < 1e-10);
}

TEST_CASE("orthogonal blocks load on their own series") {
  Rng rng(5);
  const Eigen::Index T = 500;
  const Eigen::MatrixXd g = normal_matrix(rng, T, 2);
  Eigen::MatrixXd data = 0.05 * normal_matrix(rng, T, 6);
  for (int s = 0; s < 3; ++s) data.col(s) += 3.0 * g.col(0);
  for (int s = 3; s < 6; ++s) data.col(s) += 1.5 * g.col(1);
  const PCAResult r = principal_components(centered_panel(data), 2);
  CHECK(r.loadvectors.col(0).tail(3).cwiseAbs().maxCoeff() < 0.05);
  CHECK(r.loadvectors.col(1).head(3).cwiseAbs().maxCoeff() < 0.05);
  CHECK(r.loadvectors.col(0).head(3).cwiseAbs().minCoeff() > 0.5);
  CHECK(r.loadvectors.col(1).tail(3).cwiseAbs().minCoeff() > 0.5);
}

TEST_CASE("PCA invariants hold on a random panel") {
  Rng rng(6);
  const ReturnsPanel panel = centered_panel(normal_matrix(rng, 80, 6) * normal_matrix(rng, 6, 6));
  const PCAResult r = principal_components(panel, 6);
  for (Eigen::Index j = 1; j < 6; ++j) CHECK(r.eigenvalues(j) <= r.eigenvalues(j - 1));
  CHECK(r.eigenvalues.minCoeff() > -1e-10);
  const Eigen::MatrixXd gram = r.loadvectors.transpose() * r.loadvectors;
  CHECK((gram - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-8);
  for (Eigen::Index j = 0; j < 6; ++j) {
    Eigen::Index at = 0;
    r.loadvectors.col(j).cwiseAbs().maxCoeff(&at);
    CHECK(r.loadvectors(at, j) > 0.0);
    const double var = brute_force_covariance(r.components.col(j))(0, 0);
    CHECK(var == doctest::Approx(r.eigenvalues(j)).epsilon(1e-6));
  }
  CHECK_THROWS_AS(principal_components(panel, 7), UsageError);
}

TEST_CASE("V(0) is the mean square of the centered panel") {
  Rng rng(7);
  const ReturnsPanel panel = centered_panel(normal_matrix(rng, 50, 5));
  CHECK(pca_residual_mse(panel, 0) == doctest::Approx(panel.returns.squaredNorm() / 250.0).epsilon(1e-14));
}

TEST_CASE("V(2) on a 6x4 panel matches an explicit projection") {
  Rng rng(8);
  const ReturnsPanel panel = centered_panel(normal_matrix(rng, 6, 4));
  const Eigen::MatrixXd x = panel.returns;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(brute_force_covariance(x));
  const Eigen::MatrixXd top = eig.eigenvectors().rightCols(2);
  const Eigen::MatrixXd resid = x - x * top * top.transpose();
  const double oracle = resid.squaredNorm() / 24.0;
  CHECK(std::abs(pca_residual_mse(panel, 2) - oracle) < 1e-12);
  const Eigen::VectorXd path = pca_residual_mse_path(panel, 4);
  CHECK(std::abs(path(2) - oracle) < 1e-12);
  CHECK(path(4) < 1e-12);
  for (Eigen::Index k = 1; k <= 4; ++k) CHECK(path(k) <= path(k - 1) + 1e-15);
}
