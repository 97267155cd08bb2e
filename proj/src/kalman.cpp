#include "dfa/kalman.hpp"

#include <cmath>
#include <string>

#include "dfa/error.hpp"
#include "dfa/linalg.hpp"

namespace dfa {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

// Cholesky of the innovation covariance with escalating diagonal jitter.
Eigen::LLT<Eigen::MatrixXd> factor_innovation(Eigen::MatrixXd& f) {
  Eigen::LLT<Eigen::MatrixXd> llt(f);
  if (llt.info() == Eigen::Success) return llt;
  const double base = std::max(f.trace() / static_cast<double>(f.rows()), 1e-300);
  for (double eps = 1e-10; eps <= 1e-6 * (1 + 1e-9); eps *= 10.0) {
    Eigen::MatrixXd jittered = f;
    jittered.diagonal().array() += eps * base;
    llt.compute(jittered);
    if (llt.info() == Eigen::Success) {
      f = jittered;
      return llt;
    }
  }
  throw NumericalError("innovation covariance is singular beyond the jitter budget");
}

struct StepCache {
  bool active = false;
  Eigen::MatrixXd gain;
  Eigen::LLT<Eigen::MatrixXd> llt;
  double logdet = 0.0;
  Eigen::MatrixXd filt_cov;
  Eigen::MatrixXd pred_cov;
};

double run_filter(const StateSpaceModel& model, const Eigen::MatrixXd& obs, const InitialState& init,
                  const FilterOptions& options, LikelihoodWorkspace& ws, FilterResult* out) {
  const Eigen::Index T = obs.rows();
  const Eigen::Index S = model.obs_dim();
  const Eigen::Index d = model.state_dim();
  if (obs.cols() != S) throw UsageError("observation width does not match the measurement matrix");
  if (init.mean.size() != d || init.cov.rows() != d || init.cov.cols() != d) {
    throw UsageError("initial state dimensions do not match the model");
  }
  for (Eigen::Index t = 0; t < T; ++t) {
    for (Eigen::Index s = 0; s < S; ++s) {
      if (std::isinf(obs(t, s))) throw UsageError("observations contain infinite values");
    }
  }

  if (out) {
    out->pred_mean.resize(T, d);
    out->filt_mean.resize(T, d);
    out->loglik_terms = Eigen::VectorXd::Zero(T);
    if (options.store_covariances) {
      out->pred_cov.assign(static_cast<std::size_t>(T), Eigen::MatrixXd());
      out->filt_cov.assign(static_cast<std::size_t>(T), Eigen::MatrixXd());
    } else {
      out->pred_cov.clear();
      out->filt_cov.clear();
    }
  }

  const Eigen::MatrixXd& tr = model.transit;
  ws.mean = init.mean;
  ws.cov = init.cov;
  StepCache steady;
  bool prev_full = false;
  double total = 0.0;
  std::vector<Eigen::Index> idx;
  idx.reserve(static_cast<std::size_t>(S));

  for (Eigen::Index t = 0; t < T; ++t) {
    idx.clear();
    for (Eigen::Index s = 0; s < S; ++s) {
      if (!std::isnan(obs(t, s))) idx.push_back(s);
    }
    const auto k = static_cast<Eigen::Index>(idx.size());
    const bool full = k == S;
    if (!full) steady.active = false;

    ws.mean_pred.noalias() = tr * ws.mean;
    if (steady.active) {
      ws.cov_pred = steady.pred_cov;
    } else {
      ws.tmp.noalias() = tr * ws.cov;
      ws.cov_pred.noalias() = ws.tmp * tr.transpose();
      ws.cov_pred += model.state_noise;
      linalg::symmetrize(ws.cov_pred);
    }

    if (out) {
      out->pred_mean.row(t) = ws.mean_pred.transpose();
      if (options.store_covariances) out->pred_cov[static_cast<std::size_t>(t)] = ws.cov_pred;
    }

    double term = 0.0;
    if (k == 0) {
      ws.mean = ws.mean_pred;
      ws.cov = ws.cov_pred;
    } else if (steady.active) {
      ws.innovation.noalias() = obs.row(t).transpose() - model.measure * ws.mean_pred;
      ws.mean = ws.mean_pred;
      ws.mean.noalias() += steady.gain * ws.innovation;
      ws.cov = steady.filt_cov;
      term = -0.5 * (static_cast<double>(k) * kLog2Pi + steady.logdet +
                     ws.innovation.dot(steady.llt.solve(ws.innovation)));
    } else {
      const bool check_steady = options.steady_state_tol > 0.0 && full && prev_full;
      bool converged = false;
      if (check_steady) {
        const double scale = ws.cov_pred.cwiseAbs().maxCoeff();
        converged = (ws.cov_pred - ws.cov_prev).cwiseAbs().maxCoeff() <= options.steady_state_tol * scale;
      }
      if (options.steady_state_tol > 0.0 && full) ws.cov_prev = ws.cov_pred;

      Eigen::MatrixXd noise_sub;
      if (full) {
        ws.measure_obs = model.measure;
        ws.innov_cov = model.measure_noise;
        ws.innovation = obs.row(t).transpose();
      } else {
        ws.measure_obs.resize(k, d);
        ws.innov_cov.resize(k, k);
        ws.innovation.resize(k);
        for (Eigen::Index a = 0; a < k; ++a) {
          ws.measure_obs.row(a) = model.measure.row(idx[static_cast<std::size_t>(a)]);
          ws.innovation(a) = obs(t, idx[static_cast<std::size_t>(a)]);
          for (Eigen::Index b = 0; b < k; ++b) {
            ws.innov_cov(a, b) = model.measure_noise(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
          }
        }
        noise_sub = ws.innov_cov;
      }
      const Eigen::MatrixXd& noise_obs = full ? model.measure_noise : noise_sub;
      const Eigen::MatrixXd& mo = ws.measure_obs;
      ws.pm_t.noalias() = ws.cov_pred * mo.transpose();  // d x k
      ws.innov_cov.noalias() += mo * ws.pm_t;
      linalg::symmetrize(ws.innov_cov);
      auto llt = factor_innovation(ws.innov_cov);

      ws.innovation.noalias() -= mo * ws.mean_pred;
      // K = P M' F^{-1}
      ws.gain = llt.solve(ws.pm_t.transpose()).transpose();
      ws.mean = ws.mean_pred;
      ws.mean.noalias() += ws.gain * ws.innovation;

      // Joseph form: (I - K M) P (I - K M)' + K R K'
      ws.tmp = ws.cov_pred;
      ws.tmp.noalias() -= ws.gain * ws.pm_t.transpose();
      ws.cov = ws.tmp;
      ws.cov.noalias() -= (ws.tmp * mo.transpose()) * ws.gain.transpose();
      if (!noise_obs.isZero(0.0)) ws.cov.noalias() += ws.gain * noise_obs * ws.gain.transpose();
      linalg::symmetrize(ws.cov);

      const Eigen::MatrixXd lower = llt.matrixL();
      const double logdet = 2.0 * lower.diagonal().array().log().sum();
      term = -0.5 * (static_cast<double>(k) * kLog2Pi + logdet + ws.innovation.dot(llt.solve(ws.innovation)));

      if (converged) {
        steady.active = true;
        steady.gain = ws.gain;
        steady.llt = llt;
        steady.logdet = logdet;
        steady.filt_cov = ws.cov;
        steady.pred_cov = ws.cov_pred;
      }
    }
    prev_full = full;
    total += term;

    if (out) {
      out->filt_mean.row(t) = ws.mean.transpose();
      if (options.store_covariances) out->filt_cov[static_cast<std::size_t>(t)] = ws.cov;
      out->loglik_terms(t) = term;
    }
  }
  if (out) out->loglik = total;
  return total;
}

}  // namespace

InitialState default_initial_state(const StateSpaceModel& model) {
  const Eigen::Index d = model.state_dim();
  InitialState init{Eigen::VectorXd::Zero(d), {}};
  try {
    init.cov = stationary_state_covariance(model);
  } catch (const NumericalError&) {
    init.cov = Eigen::MatrixXd::Identity(d, d) * kDiffuseVariance;
  }
  return init;
}

FilterResult kalman_filter(const StateSpaceModel& model, const Eigen::MatrixXd& obs,
                           const std::optional<InitialState>& init, const FilterOptions& options) {
  const InitialState start = init ? *init : default_initial_state(model);
  LikelihoodWorkspace ws;
  FilterResult out;
  run_filter(model, obs, start, options, ws, &out);
  return out;
}

SmootherResult kalman_smoother(const StateSpaceModel& model, const FilterResult& filt, double pinv_tol) {
  const Eigen::Index T = filt.filt_mean.rows();
  if (static_cast<Eigen::Index>(filt.filt_cov.size()) != T || static_cast<Eigen::Index>(filt.pred_cov.size()) != T) {
    throw UsageError("kalman_smoother needs a filter pass with stored covariances");
  }
  SmootherResult out;
  out.smooth_mean = filt.filt_mean;
  out.smooth_cov = filt.filt_cov;
  const Eigen::MatrixXd tr_t = model.transit.transpose();
  for (Eigen::Index t = T - 2; t >= 0; --t) {
    const auto u = static_cast<std::size_t>(t);
    const Eigen::MatrixXd pinv = linalg::symmetric_pinv(filt.pred_cov[u + 1], pinv_tol);
    const Eigen::MatrixXd j = filt.filt_cov[u] * tr_t * pinv;
    out.smooth_mean.row(t) = filt.filt_mean.row(t) +
                             (j * (out.smooth_mean.row(t + 1) - filt.pred_mean.row(t + 1)).transpose()).transpose();
    Eigen::MatrixXd cov = filt.filt_cov[u] + j * (out.smooth_cov[u + 1] - filt.pred_cov[u + 1]) * j.transpose();
    linalg::symmetrize(cov);
    out.smooth_cov[u] = std::move(cov);
  }
  return out;
}

double log_likelihood(const StateSpaceModel& model, const Eigen::MatrixXd& obs, const std::optional<InitialState>& init) {
  LikelihoodWorkspace ws;
  return log_likelihood(model, obs, init, ws);
}

double log_likelihood(const StateSpaceModel& model, const Eigen::MatrixXd& obs, const std::optional<InitialState>& init,
                      LikelihoodWorkspace& workspace, const FilterOptions& options) {
  const InitialState start = init ? *init : default_initial_state(model);
  return run_filter(model, obs, start, options, workspace, nullptr);
}

}  // namespace dfa
