#include <gtest/gtest.h>

#include <random>

#include "pdcstats/nnls.hpp"

namespace pdc {
namespace {

// KKT conditions: x >= 0, gradient g = A^T (b - A x) <= tol where x = 0, |g| <= tol where x > 0.
void expect_kkt(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& x,
                double tol) {
  const Eigen::VectorXd g = a.transpose() * (b - a * x);
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    EXPECT_GE(x(j), 0.0);
    if (x(j) > 0.0) {
      EXPECT_LE(std::abs(g(j)), tol) << j;
    } else {
      EXPECT_LE(g(j), tol) << j;
    }
  }
}

TEST(Nnls, UnconstrainedOptimumIsFeasible) {
  Eigen::MatrixXd a(3, 2);
  a << 1, 0, 0, 1, 1, 1;
  const Eigen::VectorXd x_true = Eigen::Vector2d(0.3, 0.7);
  const auto res = nnls(a, a * x_true);
  EXPECT_TRUE(res.converged);
  EXPECT_NEAR(res.x(0), 0.3, 1e-14);
  EXPECT_NEAR(res.x(1), 0.7, 1e-14);
  EXPECT_NEAR(res.residual_norm, 0.0, 1e-14);
}

TEST(Nnls, ActiveConstraint) {
  // Unconstrained solution has x1 < 0; the constrained optimum sets it to 0.
  Eigen::MatrixXd a = Eigen::MatrixXd::Identity(2, 2);
  const Eigen::Vector2d b(1.0, -2.0);
  const auto res = nnls(a, b);
  EXPECT_NEAR(res.x(0), 1.0, 1e-15);
  EXPECT_EQ(res.x(1), 0.0);
  EXPECT_NEAR(res.residual_norm, 2.0, 1e-15);
}

TEST(Nnls, RandomProblemsSatisfyKkt) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 40; ++trial) {
    const Eigen::Index m = 15, n = 8;
    Eigen::MatrixXd a(m, n);
    Eigen::VectorXd b(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      b(i) = gauss(rng);
      for (Eigen::Index j = 0; j < n; ++j) a(i, j) = gauss(rng);
    }
    const auto res = nnls(a, b);
    EXPECT_TRUE(res.converged);
    expect_kkt(a, b, res.x, 1e-10);
  }
}

TEST(Nnls, ZeroRightHandSide) {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Random(4, 3);
  const auto res = nnls(a, Eigen::VectorXd::Zero(4));
  EXPECT_TRUE(res.converged);
  EXPECT_EQ(res.x, Eigen::VectorXd::Zero(3));
}

}  // namespace
}  // namespace pdc
