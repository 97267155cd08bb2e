#include "dfa/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "dfa/error.hpp"

namespace dfa::linalg {

namespace {

constexpr Eigen::Index kKroneckerLimit = 24;
constexpr double kUnitRootTolerance = 1e-10;

Eigen::Index find_root(std::vector<Eigen::Index>& parent, Eigen::Index i) {
  while (parent[static_cast<std::size_t>(i)] != i) {
    parent[static_cast<std::size_t>(i)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
    i = parent[static_cast<std::size_t>(i)];
  }
  return i;
}

// Groups state indices that interact through A or Q.
std::vector<std::vector<Eigen::Index>> coupled_blocks(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q) {
  const Eigen::Index n = a.rows();
  std::vector<Eigen::Index> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), Eigen::Index{0});
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && (a(i, j) != 0.0 || q(i, j) != 0.0)) {
        parent[static_cast<std::size_t>(find_root(parent, i))] = find_root(parent, j);
      }
    }
  }
  std::vector<std::vector<Eigen::Index>> groups;
  std::vector<Eigen::Index> slot(static_cast<std::size_t>(n), -1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto root = static_cast<std::size_t>(find_root(parent, i));
    if (slot[root] < 0) {
      slot[root] = static_cast<Eigen::Index>(groups.size());
      groups.emplace_back();
    }
    groups[static_cast<std::size_t>(slot[root])].push_back(i);
  }
  return groups;
}

Eigen::MatrixXd lyapunov_kronecker(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q) {
  const Eigen::Index m = a.rows();
  Eigen::MatrixXd system = Eigen::MatrixXd::Identity(m * m, m * m);
  // vec(A P A') = (A kron A) vec(P), column-major vec.
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      if (a(i, j) == 0.0) continue;
      system.block(i * m, j * m, m, m) -= a(i, j) * a;
    }
  }
  const Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(q.data(), m * m);
  Eigen::VectorXd sol = system.partialPivLu().solve(rhs);
  Eigen::MatrixXd p = Eigen::Map<Eigen::MatrixXd>(sol.data(), m, m);
  symmetrize(p);
  return p;
}

Eigen::MatrixXd lyapunov_doubling(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q) {
  Eigen::MatrixXd p = q;
  Eigen::MatrixXd ak = a;
  for (int iter = 0; iter < 200; ++iter) {
    Eigen::MatrixXd increment = ak * p * ak.transpose();
    p += increment;
    const double scale = std::max(p.cwiseAbs().maxCoeff(), 1e-300);
    if (increment.cwiseAbs().maxCoeff() <= 1e-17 * scale) break;
    ak = ak * ak;
  }
  symmetrize(p);
  return p;
}

}  // namespace

double spectral_radius(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  if (a.rows() == 1) return std::abs(a(0, 0));
  Eigen::EigenSolver<Eigen::MatrixXd> solver(a, false);
  if (solver.info() != Eigen::Success) throw NumericalError("eigenvalue computation failed");
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

Eigen::MatrixXd companion(const std::vector<Eigen::MatrixXd>& blocks) {
  if (blocks.empty()) return {};
  const Eigen::Index k = blocks.front().rows();
  const auto p = static_cast<Eigen::Index>(blocks.size());
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(k * p, k * p);
  for (Eigen::Index j = 0; j < p; ++j) c.block(0, j * k, k, k) = blocks[static_cast<std::size_t>(j)];
  if (p > 1) c.block(k, 0, k * (p - 1), k * (p - 1)).setIdentity();
  return c;
}

Eigen::MatrixXd solve_discrete_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q) {
  if (a.rows() != a.cols() || q.rows() != q.cols() || a.rows() != q.rows()) {
    throw UsageError("solve_discrete_lyapunov: A and Q must be square and of equal size");
  }
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (const auto& idx : coupled_blocks(a, q)) {
    const auto m = static_cast<Eigen::Index>(idx.size());
    Eigen::MatrixXd sub_a(m, m), sub_q(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        sub_a(i, j) = a(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
        sub_q(i, j) = q(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
      }
    }
    if (spectral_radius(sub_a) >= 1.0 - kUnitRootTolerance) {
      throw NumericalError("solve_discrete_lyapunov: transition is not stable (spectral radius >= 1)");
    }
    const Eigen::MatrixXd sub_p = m <= kKroneckerLimit ? lyapunov_kronecker(sub_a, sub_q) : lyapunov_doubling(sub_a, sub_q);
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) {
        p(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]) = sub_p(i, j);
      }
    }
  }
  return p;
}

Eigen::MatrixXd symmetric_pinv(const Eigen::MatrixXd& a, double rel_tol) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a);
  if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigendecomposition failed");
  const Eigen::VectorXd& ev = solver.eigenvalues();
  const double cutoff = rel_tol * ev.cwiseAbs().maxCoeff();
  Eigen::VectorXd inv = ev.unaryExpr([cutoff](double v) { return std::abs(v) > cutoff ? 1.0 / v : 0.0; });
  Eigen::MatrixXd out = solver.eigenvectors() * inv.asDiagonal() * solver.eigenvectors().transpose();
  symmetrize(out);
  return out;
}

void symmetrize(Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double v = 0.5 * (a(i, j) + a(j, i));
      a(i, j) = v;
      a(j, i) = v;
    }
  }
}

double min_eigenvalue(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(a, Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

LeastSquares ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() != y.size()) throw UsageError("ols: design and response lengths differ");
  if (x.rows() < x.cols()) throw NumericalError("ols: fewer observations than regressors");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  LeastSquares out;
  out.rank = qr.rank();
  if (out.rank < x.cols()) throw NumericalError("ols: design matrix is rank deficient");
  out.coef = qr.solve(y);
  out.fitted = x * out.coef;
  out.residuals = y - out.fitted;
  return out;
}

}  // namespace dfa::linalg
