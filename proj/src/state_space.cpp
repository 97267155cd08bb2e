#include "dfa/state_space.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dfa/error.hpp"
#include "dfa/linalg.hpp"

namespace dfa {

void DFMSpec::validate() const {
  if (n < 1 || p < 1 || q < 0 || S < 1) {
    throw UsageError("invalid model orders: need n >= 1, p >= 1, q >= 0, S >= 1 (got n=" + std::to_string(n) +
                     ", p=" + std::to_string(p) + ", q=" + std::to_string(q) + ", S=" + std::to_string(S) + ")");
  }
}

void DFMParams::check_shapes(const DFMSpec& spec) const {
  spec.validate();
  auto fail = [](const std::string& what) { throw UsageError("parameter shape mismatch: " + what); };
  if (beta.rows() != spec.S || beta.cols() != spec.n) fail("beta must be S x n");
  if (sigma.size() != spec.S) fail("sigma must have S entries");
  if (static_cast<Eigen::Index>(lambda.size()) != spec.p) fail("lambda must hold p matrices");
  for (const auto& l : lambda) {
    if (l.rows() != spec.n || l.cols() != spec.n) fail("each lambda must be n x n");
  }
  if (static_cast<Eigen::Index>(psi.size()) != spec.q) fail("psi must hold q vectors");
  for (const auto& v : psi) {
    if (v.size() != spec.S) fail("each psi must have S entries");
  }
}

StateSpaceModel assemble_state_space(const DFMParams& params, const DFMSpec& spec) {
  params.check_shapes(spec);
  const Eigen::Index n = spec.n, p = spec.p, S = spec.S;
  const Eigen::Index lags = spec.idio_lags();
  const Eigen::Index d = spec.state_dim();
  const Eigen::Index off = spec.idio_offset();

  StateSpaceModel m;
  m.measure = Eigen::MatrixXd::Zero(S, d);
  m.measure.leftCols(n) = params.beta;
  m.measure.block(0, off, S, S).setIdentity();

  m.transit = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index j = 0; j < p; ++j) m.transit.block(0, j * n, n, n) = params.lambda[static_cast<std::size_t>(j)];
  if (p > 1) m.transit.block(n, 0, n * (p - 1), n * (p - 1)).setIdentity();
  for (Eigen::Index j = 0; j < spec.q; ++j) {
    m.transit.block(off, off + j * S, S, S).diagonal() = params.psi[static_cast<std::size_t>(j)];
  }
  if (lags > 1) m.transit.block(off + S, off, S * (lags - 1), S * (lags - 1)).setIdentity();

  m.measure_noise = Eigen::MatrixXd::Zero(S, S);
  m.state_noise = Eigen::MatrixXd::Zero(d, d);
  m.state_noise.topLeftCorner(n, n).setIdentity();
  m.state_noise.block(off, off, S, S).diagonal() = params.sigma.array().square().matrix();
  return m;
}

DFMParams disassemble_state_space(const StateSpaceModel& model, const DFMSpec& spec) {
  spec.validate();
  const Eigen::Index n = spec.n, S = spec.S;
  const Eigen::Index off = spec.idio_offset();
  if (model.measure.rows() != S || model.transit.rows() != spec.state_dim()) {
    throw UsageError("state-space model dimensions do not match the model orders");
  }
  DFMParams out;
  out.beta = model.measure.leftCols(n);
  out.sigma = model.state_noise.block(off, off, S, S).diagonal().array().sqrt().matrix();
  for (Eigen::Index j = 0; j < spec.p; ++j) out.lambda.push_back(model.transit.block(0, j * n, n, n));
  for (Eigen::Index j = 0; j < spec.q; ++j) out.psi.push_back(model.transit.block(off, off + j * S, S, S).diagonal());
  return out;
}

Eigen::MatrixXd stationary_state_covariance(const StateSpaceModel& model) {
  return linalg::solve_discrete_lyapunov(model.transit, model.state_noise);
}

Eigen::MatrixXd factor_companion(const DFMParams& params) { return linalg::companion(params.lambda); }

Eigen::MatrixXd idio_companion(const DFMParams& params, Eigen::Index series) {
  std::vector<Eigen::MatrixXd> blocks;
  for (const auto& v : params.psi) blocks.push_back(Eigen::MatrixXd::Constant(1, 1, v(series)));
  return linalg::companion(blocks);
}

StationarityReport check_stationarity(const DFMParams& params) {
  StationarityReport r;
  r.factor_radius = linalg::spectral_radius(factor_companion(params));
  for (Eigen::Index i = 0; i < params.sigma.size(); ++i) {
    if (params.psi.empty()) break;
    r.idio_radius = std::max(r.idio_radius, linalg::spectral_radius(idio_companion(params, i)));
  }
  r.stationary = r.factor_radius < 1.0 && r.idio_radius < 1.0;
  return r;
}

Eigen::MatrixXd factor_covariance(const DFMParams& params) {
  const Eigen::Index n = params.beta.cols();
  const auto c = factor_companion(params);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(c.rows(), c.cols());
  q.topLeftCorner(n, n).setIdentity();
  return linalg::solve_discrete_lyapunov(c, q).topLeftCorner(n, n);
}

Eigen::VectorXd idio_unit_variance(const DFMParams& params) {
  const Eigen::Index S = params.sigma.size();
  Eigen::VectorXd out = Eigen::VectorXd::Ones(S);
  if (params.psi.empty()) return out;
  for (Eigen::Index i = 0; i < S; ++i) {
    const auto c = idio_companion(params, i);
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(c.rows(), c.cols());
    q(0, 0) = 1.0;
    out(i) = linalg::solve_discrete_lyapunov(c, q)(0, 0);
  }
  return out;
}

Eigen::VectorXd implied_return_variance(const DFMParams& params, const DFMSpec& spec) {
  params.check_shapes(spec);
  const auto report = check_stationarity(params);
  if (!report.stationary) throw NumericalError("implied_return_variance: parameters are not stationary");
  const Eigen::MatrixXd sigma_f = factor_covariance(params);
  const Eigen::VectorXd var_z = idio_unit_variance(params);
  Eigen::VectorXd out(spec.S);
  for (Eigen::Index i = 0; i < spec.S; ++i) {
    const Eigen::VectorXd b = params.beta.row(i).transpose();
    out(i) = b.dot(sigma_f * b) + params.sigma(i) * params.sigma(i) * var_z(i);
  }
  return out;
}

bool satisfies_identification(const Eigen::MatrixXd& beta) {
  const Eigen::Index n = beta.cols();
  if (beta.rows() < n) return false;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (beta(i, i) < 0.0) return false;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (beta(i, j) != 0.0) return false;
    }
  }
  return true;
}

}  // namespace dfa
