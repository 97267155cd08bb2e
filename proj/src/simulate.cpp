#include "dfa/simulate.hpp"

#include <random>

#include "dfa/error.hpp"
#include "dfa/linalg.hpp"

namespace dfa {

std::vector<Date> weekday_calendar(const Date& start, Eigen::Index count) {
  std::vector<Date> out;
  out.reserve(static_cast<std::size_t>(count));
  std::chrono::sys_days day{start};
  while (static_cast<Eigen::Index>(out.size()) < count) {
    const auto wd = std::chrono::weekday{day};
    if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) out.emplace_back(day);
    day += std::chrono::days{1};
  }
  return out;
}

Shocks draw_shocks(const DFMParams& params, const DFMSpec& spec, Eigen::Index steps, std::uint64_t seed,
                   bool stationary_start) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Shocks shocks;
  shocks.factor.resize(steps, spec.n);
  shocks.idio.resize(steps, spec.S);
  for (Eigen::Index t = 0; t < steps; ++t) {
    for (Eigen::Index j = 0; j < spec.n; ++j) shocks.factor(t, j) = normal(rng);
    for (Eigen::Index i = 0; i < spec.S; ++i) shocks.idio(t, i) = normal(rng);
  }
  if (stationary_start) {
    // Unit-scale idiosyncratic states: scale sigma out so the recursion stays on Z.
    DFMParams unit = params;
    unit.sigma.setOnes();
    const auto model = assemble_state_space(unit, spec);
    const Eigen::MatrixXd p = stationary_state_covariance(model);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(p);
    const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    Eigen::VectorXd z(p.rows());
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = normal(rng);
    shocks.initial_state = eig.eigenvectors() * root.asDiagonal() * z;
  }
  return shocks;
}

SimOutput simulate_from_shocks(const DFMParams& params, const DFMSpec& spec, const Shocks& shocks, Eigen::Index burn_in,
                               const Date& start_date) {
  params.check_shapes(spec);
  const Eigen::Index n = spec.n, p = spec.p, q = spec.q, S = spec.S;
  const Eigen::Index steps = shocks.factor.rows();
  if (burn_in < 0 || burn_in > steps) throw UsageError("burn-in must lie in [0, number of shock rows]");
  const Eigen::Index t_obs = steps - burn_in;

  // Ring histories: factor_hist.col(j) = F_{t-1-j}, idio_hist.col(j) = Z_{t-1-j}.
  Eigen::MatrixXd factor_hist = Eigen::MatrixXd::Zero(n, p);
  Eigen::MatrixXd idio_hist = Eigen::MatrixXd::Zero(S, std::max<Eigen::Index>(q, 1));
  if (shocks.initial_state.size() > 0) {
    const Eigen::Index off = spec.idio_offset();
    for (Eigen::Index j = 0; j < p; ++j) factor_hist.col(j) = shocks.initial_state.segment(j * n, n);
    for (Eigen::Index j = 0; j < std::max<Eigen::Index>(q, 1); ++j) idio_hist.col(j) = shocks.initial_state.segment(off + j * S, S);
  }

  SimOutput out;
  out.true_factors.resize(t_obs, n);
  out.true_idio.resize(t_obs, S);
  Eigen::VectorXd f(n), z(S);
  for (Eigen::Index t = 0; t < steps; ++t) {
    f = shocks.factor.row(t).transpose();
    for (Eigen::Index j = 0; j < p; ++j) f += params.lambda[static_cast<std::size_t>(j)] * factor_hist.col(j);
    for (Eigen::Index i = 0; i < S; ++i) {
      double v = shocks.idio(t, i);
      for (Eigen::Index j = 0; j < q; ++j) v += params.psi[static_cast<std::size_t>(j)](i) * idio_hist(i, j);
      z(i) = v;
    }
    for (Eigen::Index j = p - 1; j > 0; --j) factor_hist.col(j) = factor_hist.col(j - 1);
    factor_hist.col(0) = f;
    for (Eigen::Index j = idio_hist.cols() - 1; j > 0; --j) idio_hist.col(j) = idio_hist.col(j - 1);
    idio_hist.col(0) = z;
    if (t >= burn_in) {
      out.true_factors.row(t - burn_in) = f.transpose();
      out.true_idio.row(t - burn_in) = z.transpose();
    }
  }

  out.returns.dates = weekday_calendar(start_date, t_obs);
  for (Eigen::Index i = 0; i < S; ++i) out.returns.tickers.push_back("S" + std::to_string(i + 1));
  out.returns.returns = out.true_factors * params.beta.transpose() + out.true_idio * params.sigma.asDiagonal();
  out.returns.means = Eigen::VectorXd::Zero(S);
  out.returns.centered = false;
  return out;
}

SimOutput simulate_dfm(const DFMParams& params, const DFMSpec& spec, Eigen::Index t_obs, std::uint64_t seed,
                       const SimOptions& options) {
  params.check_shapes(spec);
  if (t_obs < 1) throw UsageError("simulate_dfm: t_obs must be positive");
  if (options.burn_in < 0) throw UsageError("simulate_dfm: burn-in must be nonnegative");
  if (!check_stationarity(params).stationary) throw NumericalError("simulate_dfm: parameters are not stationary");
  const auto shocks = draw_shocks(params, spec, options.burn_in + t_obs, seed, options.stationary_start);
  auto out = simulate_from_shocks(params, spec, shocks, options.burn_in, options.start_date);
  out.seed = seed;
  return out;
}

}  // namespace dfa
