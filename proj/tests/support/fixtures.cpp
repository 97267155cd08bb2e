#include "fixtures.hpp"

#include <string>

#include "dfa/linalg.hpp"
#include "dfa/simulate.hpp"
#include "dfa/transform.hpp"

namespace dfa::testing {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd normal_matrix(Rng& rng, Index rows, Index cols, double sd) {
  std::normal_distribution<double> dist(0.0, sd);
  MatrixXd m(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) m(r, c) = dist(rng);
  return m;
}

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

DFMParams random_params(Rng& rng, const DFMSpec& spec, double coef_scale) {
  const Index n = spec.n, S = spec.S;
  DFMParams params;
  params.beta = normal_matrix(rng, S, n);
  for (Index r = 0; r < n; ++r) {
    for (Index c = r + 1; c < n; ++c) params.beta(r, c) = 0.0;
    params.beta(r, r) = uniform(rng, 0.3, 1.5);
  }
  params.sigma.resize(S);
  for (Index i = 0; i < S; ++i) params.sigma(i) = uniform(rng, 0.4, 1.6);
  std::vector<MatrixXd> free(spec.p);
  for (auto& u : free) u = normal_matrix(rng, n, n, coef_scale);
  params.lambda = transform::constrain_stationary(free);
  params.psi.assign(spec.q, VectorXd(S));
  for (Index i = 0; i < S && spec.q > 0; ++i) {
    const VectorXd coef = transform::constrain_ar(normal_matrix(rng, spec.q, 1, coef_scale).col(0));
    for (Index j = 0; j < spec.q; ++j) params.psi[j](i) = coef(j);
  }
  return params;
}

StateSpaceModel random_generic_model(Rng& rng, Index d, Index S) {
  StateSpaceModel m;
  MatrixXd t = normal_matrix(rng, d, d);
  const double radius = linalg::spectral_radius(t);
  m.transit = t * (uniform(rng, 0.3, 0.9) / std::max(radius, 1e-12));
  m.measure = normal_matrix(rng, S, d);
  const MatrixXd a = normal_matrix(rng, d, d);
  m.state_noise = a * a.transpose() / static_cast<double>(d) + 0.1 * MatrixXd::Identity(d, d);
  const MatrixXd b = normal_matrix(rng, S, S);
  m.measure_noise = b * b.transpose() / static_cast<double>(S) + 0.2 * MatrixXd::Identity(S, S);
  return m;
}

ReturnsPanel panel_from_matrix(const MatrixXd& data, bool centered) {
  ReturnsPanel p;
  p.dates = weekday_calendar(Date{std::chrono::year{2015}, std::chrono::January, std::chrono::day{1}}, data.rows());
  for (Index i = 0; i < data.cols(); ++i) p.tickers.push_back("S" + std::to_string(i + 1));
  p.returns = data;
  p.means = VectorXd::Zero(data.cols());
  p.centered = centered;
  return p;
}

ReturnsPanel centered_panel(const MatrixXd& data) {
  ReturnsPanel p = panel_from_matrix(data, true);
  for (Index i = 0; i < data.cols(); ++i) {
    double sum = 0.0;
    Index count = 0;
    for (Index t = 0; t < data.rows(); ++t)
      if (!is_missing(data(t, i))) {
        sum += data(t, i);
        ++count;
      }
    const double mean = count ? sum / static_cast<double>(count) : 0.0;
    p.means(i) = mean;
    p.returns.col(i).array() -= mean;
  }
  return p;
}

DFMParams one_factor_params(const VectorXd& beta, double lambda, const VectorXd& psi, const VectorXd& sigma) {
  DFMParams p;
  p.beta = beta;
  p.sigma = sigma;
  p.lambda = {MatrixXd::Constant(1, 1, lambda)};
  p.psi = {psi};
  return p;
}

}  // namespace dfa::testing
