#include "dfa/pca.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

#include "dfa/error.hpp"

namespace dfa {

namespace {

void check_panel(const ReturnsPanel& returns) {
  if (returns.rows() < 2) throw DataError("at least 2 time rows are needed for a covariance");
  if (returns.cols() < 1) throw DataError("panel has no series");
  const auto empty = returns.empty_series();
  if (!empty.empty()) {
    throw DataError("series " + returns.tickers[static_cast<std::size_t>(empty.front())] + " has no present entries");
  }
}

struct Decomposition {
  Eigen::VectorXd values;   // descending
  Eigen::MatrixXd vectors;  // matching columns, sign-normalized
};

Decomposition decompose(const Eigen::MatrixXd& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw NumericalError("covariance eigendecomposition failed");
  const Eigen::Index s = cov.rows();
  Decomposition out{Eigen::VectorXd(s), Eigen::MatrixXd(s, s)};
  for (Eigen::Index j = 0; j < s; ++j) {
    out.values(j) = solver.eigenvalues()(s - 1 - j);
    Eigen::VectorXd v = solver.eigenvectors().col(s - 1 - j);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0.0) v = -v;
    out.vectors.col(j) = v;
  }
  return out;
}

}  // namespace

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& data) {
  if (data.rows() < 2) throw DataError("at least 2 time rows are needed for a covariance");
  const Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
  Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(data.rows() - 1);
  return 0.5 * (cov + cov.transpose());
}

Eigen::MatrixXd pca_data_matrix(const ReturnsPanel& returns, const CovarianceOptions& options) {
  check_panel(returns);
  Eigen::MatrixXd x = returns.zero_imputed();
  x = x.rowwise() - x.colwise().mean();
  if (options.correlation) {
    for (Eigen::Index s = 0; s < x.cols(); ++s) {
      const double sd = std::sqrt(x.col(s).squaredNorm() / static_cast<double>(x.rows() - 1));
      if (!(sd > 0.0)) throw DataError("series " + returns.tickers[static_cast<std::size_t>(s)] + " has zero variance");
      x.col(s) /= sd;
    }
  }
  return x;
}

Eigen::MatrixXd sample_covariance(const ReturnsPanel& returns, const CovarianceOptions& options) {
  check_panel(returns);
  if (options.missing == MissingPolicy::ImputeZero) {
    return sample_covariance(pca_data_matrix(returns, options));
  }
  const Eigen::MatrixXd& r = returns.returns;
  const Eigen::Index S = r.cols(), T = r.rows();
  Eigen::MatrixXd cov(S, S);
  for (Eigen::Index i = 0; i < S; ++i) {
    for (Eigen::Index j = i; j < S; ++j) {
      double si = 0, sj = 0;
      Eigen::Index count = 0;
      for (Eigen::Index t = 0; t < T; ++t) {
        if (is_missing(r(t, i)) || is_missing(r(t, j))) continue;
        si += r(t, i);
        sj += r(t, j);
        ++count;
      }
      if (count < 2) throw DataError("fewer than 2 pairwise-complete rows for " + returns.tickers[static_cast<std::size_t>(i)] + "/" + returns.tickers[static_cast<std::size_t>(j)]);
      const double mi = si / static_cast<double>(count), mj = sj / static_cast<double>(count);
      double acc = 0;
      for (Eigen::Index t = 0; t < T; ++t) {
        if (is_missing(r(t, i)) || is_missing(r(t, j))) continue;
        acc += (r(t, i) - mi) * (r(t, j) - mj);
      }
      cov(i, j) = cov(j, i) = acc / static_cast<double>(count - 1);
    }
  }
  if (options.correlation) {
    const Eigen::VectorXd sd = cov.diagonal().cwiseSqrt();
    if ((sd.array() <= 0.0).any()) throw DataError("a series has zero variance");
    cov = sd.cwiseInverse().asDiagonal() * cov * sd.cwiseInverse().asDiagonal();
  }
  return cov;
}

PCAResult principal_components(const ReturnsPanel& returns, Eigen::Index k, const CovarianceOptions& options) {
  if (k < 1 || k > std::min(returns.cols(), returns.rows())) {
    throw UsageError("number of components must lie in [1, min(S, T)]");
  }
  const Eigen::MatrixXd x = pca_data_matrix(returns, options);
  const Eigen::MatrixXd cov = options.missing == MissingPolicy::ImputeZero ? sample_covariance(x)
                                                                           : sample_covariance(returns, options);
  auto dec = decompose(cov);
  PCAResult out;
  out.eigenvalues = std::move(dec.values);
  out.loadvectors = dec.vectors.leftCols(k);
  out.components = x * out.loadvectors;
  return out;
}

Eigen::VectorXd pca_residual_mse_path(const ReturnsPanel& returns, Eigen::Index n_max) {
  if (n_max < 0 || n_max > std::min(returns.cols(), returns.rows())) {
    throw UsageError("factor count must lie in [0, min(S, T)]");
  }
  const Eigen::MatrixXd x = pca_data_matrix(returns);
  const auto dec = decompose(sample_covariance(x));
  const double nt = static_cast<double>(x.rows() * x.cols());
  Eigen::VectorXd out(n_max + 1);
  out(0) = x.squaredNorm() / nt;
  for (Eigen::Index n = 1; n <= n_max; ++n) {
    const Eigen::MatrixXd a = dec.vectors.leftCols(n);
    out(n) = (x - x * a * a.transpose()).squaredNorm() / nt;
  }
  return out;
}

double pca_residual_mse(const ReturnsPanel& returns, Eigen::Index n) { return pca_residual_mse_path(returns, n)(n); }

}  // namespace dfa
