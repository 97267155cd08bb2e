#include "dfa/criteria.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "dfa/error.hpp"
#include "dfa/pca.hpp"

namespace dfa {

namespace {

Eigen::Index argmin(const Eigen::VectorXd& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v(i) < v(best)) best = i;
  return best;
}

}  // namespace

Eigen::Index CriteriaTable::argmin_ic1() const { return argmin(ic1); }
Eigen::Index CriteriaTable::argmin_ic2() const { return argmin(ic2); }
Eigen::Index CriteriaTable::argmin_ic3() const { return argmin(ic3); }

CriteriaTable bai_ng_from_mse(const Eigen::VectorXd& residual_mse, Eigen::Index n_series, Eigen::Index n_obs) {
  if (n_series < 1 || n_obs < 1) throw UsageError("panel dimensions must be positive");
  const double N = static_cast<double>(n_series);
  const double T = static_cast<double>(n_obs);
  const double c = std::min(N, T);
  const double scale = (N + T) / (N * T);
  const double pen1 = scale * std::log(N * T / (N + T));
  const double pen2 = scale * std::log(c);
  const double pen3 = std::log(c) / c;

  CriteriaTable table;
  table.residual_mse = residual_mse;
  table.n_series = n_series;
  table.n_obs = n_obs;
  const Eigen::Index size = residual_mse.size();
  table.ic1.resize(size);
  table.ic2.resize(size);
  table.ic3.resize(size);
  for (Eigen::Index k = 0; k < size; ++k) {
    if (!(residual_mse(k) > 0.0)) throw DataError("residual variance is zero; the criteria are undefined");
    const double base = std::log(residual_mse(k));
    const double n = static_cast<double>(k);
    table.ic1(k) = base + n * pen1;
    table.ic2(k) = base + n * pen2;
    table.ic3(k) = base + n * pen3;
  }
  return table;
}

CriteriaTable bai_ng_table(const ReturnsPanel& returns, Eigen::Index n_max) {
  if (n_max < 1) throw UsageError("n_max must be at least 1");
  const Eigen::VectorXd path = pca_residual_mse_path(returns, n_max);
  const double floor = 1e-12 * path(0);
  for (Eigen::Index k = 0; k <= n_max; ++k) {
    if (!(path(k) > floor)) {
      throw DataError("panel is spanned by " + std::to_string(k) +
                      " components; residual variance vanishes and the criteria are undefined");
    }
  }
  return bai_ng_from_mse(path, returns.cols(), returns.rows());
}

double bic(double loglik, double k_params, Eigen::Index t_obs) {
  if (t_obs < 1) throw UsageError("BIC needs at least one observation");
  return -2.0 * loglik + k_params * std::log(static_cast<double>(t_obs));
}

Eigen::Index bic_param_count(const DFMSpec& spec) {
  return spec.S * spec.n + spec.S + spec.n * spec.n * spec.p + spec.S * spec.q;
}

OrderSelection select_order(const ReturnsPanel& returns, Eigen::Index n, const std::vector<Eigen::Index>& p_grid,
                            const std::vector<Eigen::Index>& q_grid, const SelectOptions& options) {
  if (p_grid.empty() || q_grid.empty()) throw UsageError("order grids must be nonempty");
  OrderSelection out;
  for (Eigen::Index p : p_grid)
    for (Eigen::Index q : q_grid) {
      OrderCandidate c;
      c.p = p;
      c.q = q;
      out.candidates.push_back(c);
    }

  FitOptions fit_options = options.fit;
  fit_options.compute_std_errors = false;
  fit_options.compute_factors = false;

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < out.candidates.size(); i = next++) {
      OrderCandidate& c = out.candidates[i];
      try {
        const DFMSpec spec{n, c.p, c.q, returns.cols()};
        const FittedModel fit = fit_mle(returns, spec, fit_options);
        c.loglik = fit.loglik;
        c.converged = fit.converged;
        c.bic = bic(fit.loglik, static_cast<double>(bic_param_count(spec)), returns.rows());
        c.ok = std::isfinite(c.bic);
        if (!c.ok) c.error = "non-finite criterion";
      } catch (const std::exception& e) {
        c.error = e.what();
      }
    }
  };
  const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(out.candidates.size())));
  std::vector<std::thread> threads;
  for (unsigned j = 1; j < jobs; ++j) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();

  const OrderCandidate* best = nullptr;
  for (const auto& c : out.candidates) {
    if (!c.ok) continue;
    if (best == nullptr || c.bic < best->bic ||
        (c.bic == best->bic && (c.p + c.q < best->p + best->q || (c.p + c.q == best->p + best->q && c.p < best->p)))) {
      best = &c;
    }
  }
  if (best == nullptr) throw NumericalError("every candidate order failed to fit");
  out.p = best->p;
  out.q = best->q;
  return out;
}

}  // namespace dfa
