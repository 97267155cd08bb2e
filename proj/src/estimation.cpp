#include "dfa/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dfa/error.hpp"
#include "dfa/linalg.hpp"
#include "dfa/pca.hpp"
#include "dfa/transform.hpp"

namespace dfa {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double softplus(double x) { return x > 30.0 ? x : std::log1p(std::exp(x)); }

double inverse_softplus(double y) { return y > 30.0 ? y : y + std::log(-std::expm1(-y)); }

void check_panel_fits_spec(const ReturnsPanel& returns, const DFMSpec& spec) {
  spec.validate();
  if (returns.cols() != spec.S) {
    throw UsageError("model expects " + std::to_string(spec.S) + " series, panel has " +
                     std::to_string(returns.cols()));
  }
  if (spec.n > spec.S) throw UsageError("more factors than series");
}

double present_sd(const VectorXd& x) {
  double sum = 0.0, sq = 0.0;
  Index count = 0;
  for (Index t = 0; t < x.size(); ++t) {
    if (is_missing(x(t))) continue;
    sum += x(t);
    sq += x(t) * x(t);
    ++count;
  }
  if (count < 2) return 0.0;
  const double mean = sum / static_cast<double>(count);
  return std::sqrt(std::max(0.0, (sq - count * mean * mean) / static_cast<double>(count - 1)));
}

// Rows t = lags..T-1 of [x_{t-1}, ..., x_{t-lags}] for a T x k series.
MatrixXd lagged_design(const MatrixXd& x, Index lags) {
  const Index rows = x.rows() - lags;
  const Index k = x.cols();
  MatrixXd design(rows, k * lags);
  for (Index j = 0; j < lags; ++j) design.middleCols(j * k, k) = x.middleRows(lags - 1 - j, rows);
  return design;
}

std::vector<MatrixXd> scaled(const std::vector<MatrixXd>& blocks, double factor) {
  std::vector<MatrixXd> out = blocks;
  for (auto& b : out) b *= factor;
  return out;
}

}  // namespace

DFMParams initialize_params(const ReturnsPanel& returns, const DFMSpec& spec) {
  check_panel_fits_spec(returns, spec);
  const Index n = spec.n, p = spec.p, q = spec.q, S = spec.S;
  const MatrixXd data = pca_data_matrix(returns);
  const Index T = data.rows();
  if (T <= std::max(p, q) + n + 1) throw DataError("too few observations for the requested model orders");

  VectorXd series_sd(S);
  for (Index i = 0; i < S; ++i) {
    series_sd(i) = present_sd(returns.returns.col(i));
    if (!(series_sd(i) > 0.0)) throw DataError("series '" + returns.tickers[i] + "' has zero variance");
  }

  const PCAResult pcs = principal_components(returns, n);
  VectorXd root(n);
  for (Index j = 0; j < n; ++j) root(j) = std::sqrt(std::max(pcs.eigenvalues(j), 1e-12));
  MatrixXd beta = pcs.loadvectors * root.asDiagonal();
  MatrixXd factors = pcs.components * root.cwiseInverse().asDiagonal();

  DFMParams params;
  params.lambda.assign(p, MatrixXd::Zero(n, n));
  MatrixXd innov_cov = MatrixXd::Identity(n, n);
  try {
    const MatrixXd design = lagged_design(factors, p);
    const MatrixXd target = factors.bottomRows(T - p);
    const auto qr = design.colPivHouseholderQr();
    if (qr.rank() == design.cols()) {
      const MatrixXd coef = qr.solve(target);  // (n p) x n
      for (Index j = 0; j < p; ++j) params.lambda[j] = coef.middleRows(j * n, n).transpose();
      const MatrixXd resid = target - design * coef;
      innov_cov = resid.transpose() * resid / static_cast<double>(resid.rows());
    }
  } catch (const Error&) {
  }

  // Rescale so factor innovations have identity covariance.
  Eigen::LLT<MatrixXd> llt(innov_cov);
  MatrixXd chol = llt.info() == Eigen::Success ? MatrixXd(llt.matrixL()) : MatrixXd::Identity(n, n);
  if ((chol.diagonal().array() <= 1e-8).any()) chol = MatrixXd::Identity(n, n);
  const MatrixXd chol_inv = chol.triangularView<Eigen::Lower>().solve(MatrixXd::Identity(n, n));
  beta = beta * chol;
  for (auto& l : params.lambda) l = chol_inv * l * chol;

  // Rotate onto the lower-triangular identification block.
  const Eigen::HouseholderQR<MatrixXd> rot(beta.topRows(n).transpose());
  MatrixXd rotation = rot.householderQ() * MatrixXd::Identity(n, n);
  beta = beta * rotation;
  for (Index j = 0; j < n; ++j) {
    if (beta(j, j) < 0.0) {
      beta.col(j) = -beta.col(j);
      rotation.col(j) = -rotation.col(j);
    }
  }
  for (Index r = 0; r < n; ++r)
    for (Index c = r + 1; c < n; ++c) beta(r, c) = 0.0;
  for (Index j = 0; j < n; ++j) beta(j, j) = std::max(beta(j, j), 1e-6 * series_sd(j));
  for (auto& l : params.lambda) l = rotation.transpose() * l * rotation;
  params.beta = beta;

  const MatrixXd resid = data - pcs.components * pcs.loadvectors.transpose();
  params.sigma.resize(S);
  params.psi.assign(q, VectorXd::Zero(S));
  for (Index i = 0; i < S; ++i) {
    const VectorXd e = resid.col(i);
    double innov_sd = std::sqrt(e.squaredNorm() / static_cast<double>(T - 1));
    if (q > 0) {
      try {
        const MatrixXd design = lagged_design(e, q);
        const linalg::LeastSquares fit = linalg::ols(design, e.tail(T - q));
        for (Index j = 0; j < q; ++j) params.psi[j](i) = fit.coef(j);
        innov_sd = std::sqrt(fit.residuals.squaredNorm() / static_cast<double>(fit.residuals.size()));
      } catch (const Error&) {
      }
    }
    params.sigma(i) = std::max(innov_sd, std::max(1e-4 * series_sd(i), 1e-8));
  }

  for (int guard = 0; guard < 10000; ++guard) {
    const StationarityReport report = check_stationarity(params);
    if (report.factor_radius < 0.995 && report.idio_radius < 0.995) return params;
    params.lambda = scaled(params.lambda, 0.9);
    for (auto& v : params.psi) v *= 0.9;
  }
  throw NumericalError("could not shrink initial values into the stationary region");
}

Index packed_size(const DFMSpec& spec) {
  const Index n = spec.n, S = spec.S;
  return n * (n + 1) / 2 + (S - n) * n + S + spec.p * n * n + S * spec.q;
}

VectorXd pack(const DFMParams& params, const DFMSpec& spec) {
  spec.validate();
  params.check_shapes(spec);
  const Index n = spec.n, S = spec.S, p = spec.p, q = spec.q;
  if (!satisfies_identification(params.beta)) throw UsageError("loadings violate the identification constraint");
  VectorXd x(packed_size(spec));
  Index k = 0;
  for (Index r = 0; r < S; ++r) {
    for (Index c = 0; c < n; ++c) {
      if (r < n && c > r) continue;
      if (r < n && c == r) {
        if (!(params.beta(r, r) > 0.0)) throw UsageError("identification diagonal of beta must be positive");
        x(k++) = inverse_softplus(params.beta(r, r));
      } else {
        x(k++) = params.beta(r, c);
      }
    }
  }
  for (Index i = 0; i < S; ++i) {
    if (!(params.sigma(i) > 0.0)) throw UsageError("sigma entries must be positive");
    x(k++) = std::log(params.sigma(i));
  }
  const auto free_lambda = transform::unconstrain_stationary(params.lambda);
  for (Index j = 0; j < p; ++j)
    for (Index r = 0; r < n; ++r)
      for (Index c = 0; c < n; ++c) x(k++) = free_lambda[j](r, c);
  for (Index i = 0; i < S && q > 0; ++i) {
    VectorXd coef(q);
    for (Index j = 0; j < q; ++j) coef(j) = params.psi[j](i);
    const VectorXd free_coef = transform::unconstrain_ar(coef);
    for (Index j = 0; j < q; ++j) x(k + i * q + j) = free_coef(j);
  }
  if (!x.allFinite()) throw NumericalError("packed parameters are not finite");
  return x;
}

DFMParams unpack(const VectorXd& x, const DFMSpec& spec) {
  spec.validate();
  if (x.size() != packed_size(spec)) throw UsageError("packed vector has the wrong length");
  if (!x.allFinite()) throw NumericalError("packed vector contains non-finite entries");
  const Index n = spec.n, S = spec.S, p = spec.p, q = spec.q;
  DFMParams params;
  params.beta = MatrixXd::Zero(S, n);
  Index k = 0;
  for (Index r = 0; r < S; ++r) {
    for (Index c = 0; c < n; ++c) {
      if (r < n && c > r) continue;
      params.beta(r, c) = (r < n && c == r) ? softplus(x(k++)) : x(k++);
    }
  }
  params.sigma = x.segment(k, S).array().exp();
  k += S;
  std::vector<MatrixXd> free_lambda(p, MatrixXd(n, n));
  for (Index j = 0; j < p; ++j)
    for (Index r = 0; r < n; ++r)
      for (Index c = 0; c < n; ++c) free_lambda[j](r, c) = x(k++);
  params.lambda = transform::constrain_stationary(free_lambda);
  params.psi.assign(q, VectorXd(S));
  for (Index i = 0; i < S && q > 0; ++i) {
    const VectorXd coef = transform::constrain_ar(x.segment(k + i * q, q));
    for (Index j = 0; j < q; ++j) params.psi[j](i) = coef(j);
  }
  return params;
}

VectorXd flatten(const DFMParams& params) {
  const Index S = params.beta.rows(), n = params.beta.cols();
  const Index p = static_cast<Index>(params.lambda.size()), q = static_cast<Index>(params.psi.size());
  VectorXd v(S * n + S + p * n * n + q * S);
  Index k = 0;
  for (Index r = 0; r < S; ++r)
    for (Index c = 0; c < n; ++c) v(k++) = params.beta(r, c);
  v.segment(k, S) = params.sigma;
  k += S;
  for (const auto& l : params.lambda)
    for (Index r = 0; r < n; ++r)
      for (Index c = 0; c < n; ++c) v(k++) = l(r, c);
  for (const auto& ps : params.psi) {
    v.segment(k, S) = ps;
    k += S;
  }
  return v;
}

DFMParams unflatten(const VectorXd& v, const DFMSpec& spec) {
  const Index n = spec.n, S = spec.S, p = spec.p, q = spec.q;
  if (v.size() != S * n + S + p * n * n + q * S) throw UsageError("flattened vector has the wrong length");
  DFMParams params;
  params.beta.resize(S, n);
  Index k = 0;
  for (Index r = 0; r < S; ++r)
    for (Index c = 0; c < n; ++c) params.beta(r, c) = v(k++);
  params.sigma = v.segment(k, S);
  k += S;
  params.lambda.assign(p, MatrixXd(n, n));
  for (auto& l : params.lambda)
    for (Index r = 0; r < n; ++r)
      for (Index c = 0; c < n; ++c) l(r, c) = v(k++);
  params.psi.assign(q, VectorXd(S));
  for (auto& ps : params.psi) {
    ps = v.segment(k, S);
    k += S;
  }
  return params;
}

NegativeLogLikelihood::NegativeLogLikelihood(const ReturnsPanel& returns, const DFMSpec& spec, double steady_state_tol)
    : obs_(&returns.returns), spec_(spec) {
  check_panel_fits_spec(returns, spec);
  options_.store_covariances = false;
  options_.steady_state_tol = steady_state_tol;
}

double NegativeLogLikelihood::operator()(const VectorXd& x) {
  try {
    const StateSpaceModel model = assemble_state_space(unpack(x, spec_), spec_);
    const double ll = log_likelihood(model, *obs_, default_initial_state(model), workspace_, options_);
    return std::isfinite(ll) ? -ll : kInf;
  } catch (const Error&) {
    return kInf;
  }
}

FactorEstimates extract_factors(const DFMParams& params, const DFMSpec& spec, const MatrixXd& obs) {
  const StateSpaceModel model = assemble_state_space(params, spec);
  const FilterResult filt = kalman_filter(model, obs);
  const SmootherResult smooth = kalman_smoother(model, filt);
  return {filt.filt_mean.leftCols(spec.n), smooth.smooth_mean.leftCols(spec.n)};
}

FittedModel fit_mle(const ReturnsPanel& returns, const DFMSpec& spec, const FitOptions& options) {
  check_panel_fits_spec(returns, spec);
  if (!returns.empty_series().empty()) throw DataError("panel contains a series with no observed returns");

  const DFMParams start = options.start ? *options.start : initialize_params(returns, spec);
  start.check_shapes(spec);
  if (!check_stationarity(start).stationary) throw UsageError("starting parameters are not stationary");

  auto exact_loglik = [&](const DFMParams& params) {
    const StateSpaceModel model = assemble_state_space(params, spec);
    return log_likelihood(model, returns.returns);
  };

  FittedModel fitted;
  fitted.spec = spec;
  fitted.dates = returns.dates;
  fitted.tickers = returns.tickers;
  fitted.init_loglik = exact_loglik(start);
  if (!std::isfinite(fitted.init_loglik)) throw NumericalError("log-likelihood is not finite at the starting values");

  NegativeLogLikelihood objective(returns, spec, options.steady_state_tol);
  const VectorXd x0 = pack(start, spec);
  const optim::Result res = minimize_bfgs(std::ref(objective), x0, options.optimizer);

  fitted.params = unpack(res.x, spec);
  fitted.loglik = exact_loglik(fitted.params);
  fitted.converged = res.converged;
  fitted.iterations = res.iterations;
  fitted.gradient_norm = res.gradient.size() ? res.gradient.cwiseAbs().maxCoeff() : 0.0;
  fitted.stop_reason = res.reason;
  if (!(fitted.loglik >= fitted.init_loglik)) {
    fitted.params = unpack(x0, spec);
    fitted.loglik = exact_loglik(fitted.params);
    fitted.warnings.push_back("optimizer did not improve on the starting values");
  }
  if (!fitted.converged) fitted.warnings.push_back("optimizer stopped without converging: " + res.reason);

  if (options.compute_factors) {
    const FactorEstimates f = extract_factors(fitted.params, spec, returns.returns);
    fitted.factors_filtered = f.filtered;
    fitted.factors_smoothed = f.smoothed;
  }
  if (options.compute_std_errors) {
    StdErrorReport report = standard_errors(fitted, returns, options.steady_state_tol);
    fitted.std_errors = report.errors;
    for (auto& w : report.warnings) fitted.warnings.push_back(std::move(w));
  }
  return fitted;
}

StdErrorReport standard_errors(const FittedModel& fitted, const ReturnsPanel& returns, double steady_state_tol) {
  const DFMSpec& spec = fitted.spec;
  const VectorXd x = pack(fitted.params, spec);
  const Index m = x.size();
  NegativeLogLikelihood objective(returns, spec, steady_state_tol);
  const MatrixXd hess = optim::numerical_hessian(std::ref(objective), x);

  StdErrorReport report;
  if (!hess.allFinite()) {
    report.warnings.push_back("Hessian could not be evaluated; standard errors unavailable");
  }

  MatrixXd cov_packed = MatrixXd::Constant(m, m, kNaN);
  std::vector<bool> packed_bad(m, true);
  if (hess.allFinite()) {
    MatrixXd sym = hess;
    linalg::symmetrize(sym);
    const Eigen::SelfAdjointEigenSolver<MatrixXd> eig(sym);
    const VectorXd& values = eig.eigenvalues();
    const MatrixXd& vectors = eig.eigenvectors();
    const double cutoff = 1e-10 * std::max(values.cwiseAbs().maxCoeff(), 1e-300);
    cov_packed.setZero();
    std::fill(packed_bad.begin(), packed_bad.end(), false);
    Index degenerate = 0;
    for (Index j = 0; j < m; ++j) {
      if (values(j) > cutoff) {
        cov_packed += vectors.col(j) * vectors.col(j).transpose() / values(j);
      } else {
        ++degenerate;
        for (Index i = 0; i < m; ++i)
          if (std::abs(vectors(i, j)) > 1e-3) packed_bad[i] = true;
      }
    }
    if (degenerate > 0) {
      report.warnings.push_back("Hessian of the negative log-likelihood is not positive definite (" +
                                std::to_string(degenerate) +
                                " non-positive directions); affected standard errors are missing");
    }
  }

  // Delta method through the map from packed to natural parameters.
  const VectorXd base = flatten(unpack(x, spec));
  MatrixXd jac(base.size(), m);
  VectorXd probe = x;
  for (Index j = 0; j < m; ++j) {
    const double h = 1e-6 * std::max(std::abs(x(j)), 1.0);
    probe(j) = x(j) + h;
    const VectorXd up = flatten(unpack(probe, spec));
    probe(j) = x(j) - h;
    const VectorXd down = flatten(unpack(probe, spec));
    probe(j) = x(j);
    jac.col(j) = (up - down) / (2.0 * h);
  }
  const MatrixXd cov_natural = jac * cov_packed * jac.transpose();
  VectorXd se(base.size());
  for (Index i = 0; i < base.size(); ++i) {
    bool bad = false;
    for (Index j = 0; j < m && !bad; ++j) bad = packed_bad[j] && jac(i, j) != 0.0;
    const double var = cov_natural(i, i);
    se(i) = (bad || !(var >= 0.0)) ? kNaN : std::sqrt(var);
  }
  report.errors = unflatten(se, spec);
  for (Index r = 0; r < spec.n; ++r)
    for (Index c = r + 1; c < spec.n; ++c) report.errors.beta(r, c) = kNaN;

  const MatrixXd& beta = fitted.params.beta;
  report.beta_tstat = beta.cwiseQuotient(report.errors.beta);
  report.beta_significant.resize(beta.rows(), beta.cols());
  for (Index r = 0; r < beta.rows(); ++r)
    for (Index c = 0; c < beta.cols(); ++c) {
      const double t = report.beta_tstat(r, c);
      report.beta_significant(r, c) = std::isfinite(t) && std::abs(t) > kCritical95;
    }
  return report;
}

}  // namespace dfa
