#include "dfa/transform.hpp"

#include "dfa/error.hpp"
#include "dfa/linalg.hpp"

namespace dfa::transform {

namespace {

using Eigen::MatrixXd;

MatrixXd lower_cholesky(const MatrixXd& a, const char* what) {
  Eigen::LLT<MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) throw NumericalError(std::string("stationarity transform: ") + what + " is not positive definite");
  return llt.matrixL();
}

// Forward/backward predictor coefficients of the Levinson-Whittle recursion.
struct Recursion {
  std::vector<MatrixXd> forward;   // phi_{s,1..s}
  std::vector<MatrixXd> backward;  // phi*_{s,1..s}
  MatrixXd fvar;                   // V_s
  MatrixXd bvar;                   // V*_s
};

// Advances the recursion by one order given the new cross covariance
// delta = E[e_{s,t} r_{s,t}'] between forward and backward residuals.
void advance(Recursion& r, const MatrixXd& delta) {
  const MatrixXd a = delta * r.bvar.inverse();
  const MatrixXd b = delta.transpose() * r.fvar.inverse();
  const auto s = r.forward.size();
  std::vector<MatrixXd> fwd(s + 1), bwd(s + 1);
  for (std::size_t k = 0; k < s; ++k) {
    fwd[k] = r.forward[k] - a * r.backward[s - 1 - k];
    bwd[k] = r.backward[k] - b * r.forward[s - 1 - k];
  }
  fwd[s] = a;
  bwd[s] = b;
  r.fvar = r.fvar - a * delta.transpose();
  r.bvar = r.bvar - b * delta;
  linalg::symmetrize(r.fvar);
  linalg::symmetrize(r.bvar);
  r.forward = std::move(fwd);
  r.backward = std::move(bwd);
}

}  // namespace

std::vector<MatrixXd> constrain_stationary(const std::vector<MatrixXd>& unconstrained) {
  if (unconstrained.empty()) return {};
  const Eigen::Index k = unconstrained.front().rows();
  const MatrixXd eye = MatrixXd::Identity(k, k);

  Recursion r{{}, {}, eye, eye};
  for (const auto& u : unconstrained) {
    const MatrixXd b = lower_cholesky(eye + u * u.transpose(), "I + UU'");
    const MatrixXd pacf = b.triangularView<Eigen::Lower>().solve(u);
    const MatrixXd lf = lower_cholesky(r.fvar, "forward variance");
    const MatrixXd lb = lower_cholesky(r.bvar, "backward variance");
    advance(r, lf * pacf * lb.transpose());
  }

  // Change basis so the innovation covariance becomes the identity.
  const MatrixXd l = lower_cholesky(r.fvar, "innovation variance");
  std::vector<MatrixXd> out;
  out.reserve(r.forward.size());
  for (const auto& phi : r.forward) out.push_back(l.triangularView<Eigen::Lower>().solve(phi * l));
  return out;
}

std::vector<MatrixXd> unconstrain_stationary(const std::vector<MatrixXd>& coefficients) {
  if (coefficients.empty()) return {};
  const Eigen::Index k = coefficients.front().rows();
  const auto p = static_cast<Eigen::Index>(coefficients.size());
  const MatrixXd eye = MatrixXd::Identity(k, k);

  // Autocovariances Gamma(h) = E[y_t y_{t-h}'] of the unit-innovation process.
  const MatrixXd comp = linalg::companion(coefficients);
  MatrixXd q = MatrixXd::Zero(k * p, k * p);
  q.topLeftCorner(k, k).setIdentity();
  const MatrixXd stacked = linalg::solve_discrete_lyapunov(comp, q);
  std::vector<MatrixXd> gamma_y(static_cast<std::size_t>(p + 1));
  for (Eigen::Index h = 0; h < p; ++h) gamma_y[static_cast<std::size_t>(h)] = stacked.block(0, h * k, k, k);
  gamma_y[static_cast<std::size_t>(p)] = MatrixXd::Zero(k, k);
  for (Eigen::Index j = 1; j <= p; ++j) {
    const Eigen::Index lag = p - j;  // Gamma(p - j), may need transposing for negative lags
    gamma_y[static_cast<std::size_t>(p)] += coefficients[static_cast<std::size_t>(j - 1)] * gamma_y[static_cast<std::size_t>(lag)];
  }

  // x = C y with C = chol(Gamma_y(0))^{-1} has unit lag-zero covariance.
  const MatrixXd lf0 = lower_cholesky(gamma_y[0], "stationary covariance");
  const MatrixXd c = lf0.triangularView<Eigen::Lower>().solve(eye);
  std::vector<MatrixXd> gamma(gamma_y.size());
  for (std::size_t h = 0; h < gamma_y.size(); ++h) gamma[h] = c * gamma_y[h] * c.transpose();
  gamma[0] = eye;

  Recursion r{{}, {}, eye, eye};
  std::vector<MatrixXd> out;
  out.reserve(static_cast<std::size_t>(p));
  for (Eigen::Index s = 0; s < p; ++s) {
    MatrixXd delta = gamma[static_cast<std::size_t>(s + 1)];
    for (Eigen::Index j = 0; j < s; ++j) {
      delta -= r.forward[static_cast<std::size_t>(j)] * gamma[static_cast<std::size_t>(s - j)];
    }
    const MatrixXd lf = lower_cholesky(r.fvar, "forward variance");
    const MatrixXd lb = lower_cholesky(r.bvar, "backward variance");
    const MatrixXd pacf = lf.triangularView<Eigen::Lower>().solve(
        lb.triangularView<Eigen::Lower>().solve(delta.transpose()).transpose());
    const MatrixXd g = lower_cholesky(eye - pacf * pacf.transpose(), "I - PP'");
    out.push_back(g.triangularView<Eigen::Lower>().solve(pacf));
    advance(r, delta);
  }
  return out;
}

Eigen::VectorXd constrain_ar(const Eigen::VectorXd& unconstrained) {
  std::vector<MatrixXd> blocks;
  for (Eigen::Index i = 0; i < unconstrained.size(); ++i) blocks.push_back(MatrixXd::Constant(1, 1, unconstrained(i)));
  const auto coef = constrain_stationary(blocks);
  Eigen::VectorXd out(unconstrained.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = coef[static_cast<std::size_t>(i)](0, 0);
  return out;
}

Eigen::VectorXd unconstrain_ar(const Eigen::VectorXd& coefficients) {
  std::vector<MatrixXd> blocks;
  for (Eigen::Index i = 0; i < coefficients.size(); ++i) blocks.push_back(MatrixXd::Constant(1, 1, coefficients(i)));
  const auto u = unconstrain_stationary(blocks);
  Eigen::VectorXd out(coefficients.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = u[static_cast<std::size_t>(i)](0, 0);
  return out;
}

}  // namespace dfa::transform
