#pragma once

// Non-negative least squares, min ||A x - b|| subject to x >= 0, by the
// Lawson-Hanson active-set method.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace pdc {

struct NnlsOptions {
  /// Gradient threshold for the optimality test; <= 0 selects
  /// 10 * eps * max(m, n) * ||A||_1.
  double tolerance = 0.0;
  int max_iterations = 0;  // <= 0 selects 3 * n
};

struct NnlsResult {
  Eigen::VectorXd x;
  double residual_norm = 0.0;
  /// max over the active set of A^T (b - A x); <= tolerance at optimality.
  double max_active_gradient = 0.0;
  int iterations = 0;
  bool converged = false;
};

inline NnlsResult nnls(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                       const NnlsOptions& opts = {}) {
  const Eigen::Index n = a.cols();
  const double tol =
      opts.tolerance > 0.0
          ? opts.tolerance
          : 10.0 * std::numeric_limits<double>::epsilon() *
                static_cast<double>(std::max(a.rows(), a.cols())) *
                a.cwiseAbs().colwise().sum().maxCoeff();
  const int max_iter = opts.max_iterations > 0 ? opts.max_iterations
                                               : 3 * static_cast<int>(n) + 10;

  NnlsResult res;
  res.x = Eigen::VectorXd::Zero(n);
  std::vector<bool> passive(static_cast<std::size_t>(n), false);

  // Least-squares solution restricted to the passive columns.
  const auto solve_passive = [&]() {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (passive[static_cast<std::size_t>(j)]) idx.push_back(j);
    }
    Eigen::MatrixXd sub(a.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      sub.col(static_cast<Eigen::Index>(k)) = a.col(idx[k]);
    }
    const Eigen::VectorXd zs = sub.colPivHouseholderQr().solve(b);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    for (std::size_t k = 0; k < idx.size(); ++k) {
      z(idx[k]) = zs(static_cast<Eigen::Index>(k));
    }
    return z;
  };

  Eigen::VectorXd w = a.transpose() * (b - a * res.x);
  while (res.iterations < max_iter) {
    Eigen::Index best = -1;
    double best_w = tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!passive[static_cast<std::size_t>(j)] && w(j) > best_w) {
        best_w = w(j);
        best = j;
      }
    }
    if (best < 0) {
      res.converged = true;
      break;
    }
    passive[static_cast<std::size_t>(best)] = true;

    while (true) {
      ++res.iterations;
      Eigen::VectorXd z = solve_passive();
      bool feasible = true;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) feasible = false;
      }
      if (feasible) {
        res.x = z;
        break;
      }
      // Step from x towards z until the first passive variable hits zero.
      double alpha = 1.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && z(j) <= 0.0) {
          alpha = std::min(alpha, res.x(j) / (res.x(j) - z(j)));
        }
      }
      res.x += alpha * (z - res.x);
      for (Eigen::Index j = 0; j < n; ++j) {
        if (passive[static_cast<std::size_t>(j)] && res.x(j) <= 0.0) {
          passive[static_cast<std::size_t>(j)] = false;
          res.x(j) = 0.0;
        }
      }
      if (res.iterations >= max_iter) break;
    }
    w = a.transpose() * (b - a * res.x);
  }

  res.residual_norm = (a * res.x - b).norm();
  res.max_active_gradient = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!passive[static_cast<std::size_t>(j)]) {
      res.max_active_gradient = std::max(res.max_active_gradient, w(j));
    }
  }
  return res;
}

}  // namespace pdc
