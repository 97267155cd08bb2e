#include "dfa/optimize.hpp"

#include <algorithm>
#include <cmath>

#include "dfa/error.hpp"

namespace dfa::optim {

namespace {

double step_for(double xi, double rel) { return rel * std::max(std::abs(xi), 1.0); }

}  // namespace

Eigen::VectorXd numerical_gradient(const Objective& f, const Eigen::VectorXd& x, double rel_step) {
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = step_for(x(i), rel_step);
    probe(i) = x(i) + h;
    const double up = f(probe);
    probe(i) = x(i) - h;
    const double down = f(probe);
    probe(i) = x(i);
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

Eigen::MatrixXd numerical_hessian(const Objective& f, const Eigen::VectorXd& x, double rel_step) {
  const Eigen::Index m = x.size();
  Eigen::VectorXd h(m);
  for (Eigen::Index i = 0; i < m; ++i) h(i) = step_for(x(i), rel_step);
  const double f0 = f(x);
  Eigen::MatrixXd hess(m, m);
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < m; ++i) {
    probe(i) = x(i) + h(i);
    const double up = f(probe);
    probe(i) = x(i) - h(i);
    const double down = f(probe);
    probe(i) = x(i);
    hess(i, i) = (up - 2.0 * f0 + down) / (h(i) * h(i));
    for (Eigen::Index j = 0; j < i; ++j) {
      auto eval = [&](double si, double sj) {
        probe(i) = x(i) + si * h(i);
        probe(j) = x(j) + sj * h(j);
        const double v = f(probe);
        probe(i) = x(i);
        probe(j) = x(j);
        return v;
      };
      const double v = (eval(1, 1) - eval(1, -1) - eval(-1, 1) + eval(-1, -1)) / (4.0 * h(i) * h(j));
      hess(i, j) = v;
      hess(j, i) = v;
    }
  }
  return hess;
}

Result minimize_bfgs(const Objective& f, const Eigen::VectorXd& x0, const Settings& settings) {
  long evaluations = 0;
  auto eval = [&](const Eigen::VectorXd& x) {
    ++evaluations;
    return f(x);
  };
  Objective counted = eval;

  Result res;
  res.x = x0;
  res.value = eval(x0);
  if (!std::isfinite(res.value)) throw NumericalError("objective is not finite at the starting point");
  res.gradient = numerical_gradient(counted, res.x, settings.fd_step);

  const Eigen::Index m = x0.size();
  auto initial_inverse = [&](const Eigen::VectorXd& g) {
    return Eigen::MatrixXd(Eigen::MatrixXd::Identity(m, m) / std::max(1.0, g.cwiseAbs().maxCoeff()));
  };
  Eigen::MatrixXd hinv = initial_inverse(res.gradient);
  bool scaled = false;
  int small_changes = 0;

  for (int iter = 0; iter < settings.max_iterations; ++iter) {
    if (m == 0 || res.gradient.cwiseAbs().maxCoeff() < settings.grad_tol) {
      res.converged = true;
      res.reason = "gradient tolerance";
      break;
    }
    bool reset = false;
    Eigen::VectorXd direction = -hinv * res.gradient;
    if (res.gradient.dot(direction) >= 0.0) {
      hinv = initial_inverse(res.gradient);
      direction = -hinv * res.gradient;
      reset = true;
    }

    double alpha = 1.0;
    Eigen::VectorXd x_new;
    double f_new = 0.0;
    bool accepted = false;
    for (int attempt = 0; attempt < 2 && !accepted; ++attempt) {
      const double slope = res.gradient.dot(direction);
      alpha = 1.0;
      for (int k = 0; k < 60; ++k) {
        x_new = res.x + alpha * direction;
        f_new = eval(x_new);
        if (std::isfinite(f_new) && f_new <= res.value + 1e-4 * alpha * slope) {
          accepted = true;
          break;
        }
        alpha *= 0.5;
      }
      if (!accepted && !reset) {
        hinv = initial_inverse(res.gradient);
        direction = -hinv * res.gradient;
        reset = true;
        scaled = false;
      } else {
        break;
      }
    }
    if (!accepted) {
      res.reason = "line search failed";
      break;
    }

    const Eigen::VectorXd g_new = numerical_gradient(counted, x_new, settings.fd_step);
    const Eigen::VectorXd s = x_new - res.x;
    const Eigen::VectorXd y = g_new - res.gradient;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      if (!scaled) {
        hinv = Eigen::MatrixXd::Identity(m, m) * (sy / y.squaredNorm());
        scaled = true;
      }
      const double rho = 1.0 / sy;
      const Eigen::VectorXd hy = hinv * y;
      hinv += rho * rho * (sy + y.dot(hy)) * (s * s.transpose()) - rho * (hy * s.transpose() + s * hy.transpose());
    }

    const double change = std::abs(res.value - f_new) / std::max(std::abs(res.value), 1.0);
    res.x = x_new;
    res.value = f_new;
    res.gradient = g_new;
    res.iterations = iter + 1;
    small_changes = change < settings.rel_tol ? small_changes + 1 : 0;
    const bool near_flat = res.gradient.cwiseAbs().maxCoeff() < 10.0 * settings.grad_tol;
    if ((small_changes >= 2 && near_flat) || small_changes >= 10) {
      res.converged = true;
      res.reason = "relative objective change";
      break;
    }
  }
  if (res.reason.empty()) res.reason = "maximum iterations reached";
  if (!res.converged && res.gradient.size() > 0 && res.gradient.cwiseAbs().maxCoeff() < settings.grad_tol) {
    res.converged = true;
  }
  res.evaluations = evaluations;
  return res;
}

}  // namespace dfa::optim
