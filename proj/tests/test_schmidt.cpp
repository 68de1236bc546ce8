#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "pdcstats/schmidt.hpp"

namespace pdc {
namespace {

constexpr double kPi = std::numbers::pi;

const GaussianParams kWorkingPoint = GaussianParams::from_variances(25.0, 1.0, kPi / 4);

TEST(DecomposeSvd, SeparableKernelHasOneMode) {
  const auto s = decompose_svd(sample_gaussian(GaussianParams::from_variances(25.0, 1.0, 0.0), 300));
  ASSERT_EQ(s.size(), 1u);
  EXPECT_NEAR(s.eigenvalues[0], 1.0, 1e-12);
  EXPECT_NEAR(schmidt_number(s), 1.0, 1e-12);
  s.validate();
}

TEST(DecomposeSvd, WorkingPointSpectrumIsGeometric) {
  const auto s = decompose_svd(sample_gaussian(kWorkingPoint, 400));
  s.validate();
  std::vector<double> n, log_l;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.eigenvalues[i] < 1e-12) break;
    n.push_back(static_cast<double>(i));
    log_l.push_back(std::log(s.eigenvalues[i]));
  }
  ASSERT_GE(n.size(), 10u);
  const auto fit = oracle::least_squares_line(n, log_l);
  EXPECT_GT(fit.r_squared, 1.0 - 1e-6);
  const double q = std::exp(fit.slope);
  EXPECT_GT(q, 0.0);
  EXPECT_LT(q, 1.0);
  // lambda_n = (1 - q) q^n
  EXPECT_NEAR(std::exp(fit.intercept), 1.0 - q, 1e-6);
}

TEST(DecomposeSvd, SumPlusResidualIsOne) {
  for (double eps : {1e-3, 1e-6, 1e-9}) {
    const auto s = decompose_svd(sample_gaussian(kWorkingPoint, 200), {eps, false});
    double sum = 0.0;
    for (double l : s.eigenvalues) sum += l;
    EXPECT_NEAR(sum + s.truncation_residual, 1.0, 1e-12);
    EXPECT_LE(s.truncation_residual, eps);
    s.validate();
  }
}

TEST(DecomposeSvd, ModesAreOrthonormal) {
  const auto k = sample_gaussian(kWorkingPoint, 200);
  const auto s = decompose_svd(k, {1e-9, true});
  ASSERT_TRUE(s.modes1 && s.modes2);
  const auto& m1 = *s.modes1;
  const auto& m2 = *s.modes2;
  const Eigen::Index count = std::min<Eigen::Index>(8, m1.cols());
  for (Eigen::Index i = 0; i < count; ++i) {
    for (Eigen::Index j = 0; j < count; ++j) {
      const double expected = i == j ? 1.0 : 0.0;
      EXPECT_NEAR(std::abs(oracle::inner(m1.col(i).eval(), m1.col(j).eval(), k.axis1().step()) - expected), 0.0, 1e-8);
      EXPECT_NEAR(std::abs(oracle::inner(m2.col(i).eval(), m2.col(j).eval(), k.axis2().step()) - expected), 0.0, 1e-8);
    }
  }
}

TEST(DecomposeSvd, ModesReconstructKernel) {
  const auto k = sample_gaussian(kWorkingPoint, 150);
  const auto s = decompose_svd(k, {1e-14, true});
  Eigen::MatrixXcd rebuilt = Eigen::MatrixXcd::Zero(150, 150);
  for (std::size_t n = 0; n < s.size(); ++n) {
    const auto c = static_cast<Eigen::Index>(n);
    rebuilt += std::sqrt(s.eigenvalues[n]) * s.modes1->col(c) * s.modes2->col(c).transpose();
  }
  EXPECT_LT((rebuilt - k.values()).cwiseAbs().maxCoeff(),
            1e-6 * k.values().cwiseAbs().maxCoeff());
}

TEST(DecomposeSvd, ExchangeSymmetricKernelHasMatchingModes) {
  const auto k = sample_gaussian(kWorkingPoint, 200);
  const auto s = decompose_svd(k, {1e-6, true});
  for (Eigen::Index n = 0; n < 4; ++n) {
    // Equal up to a per-mode phase: |<xi1_n, xi2_n>| = 1.
    const auto overlap = oracle::inner(s.modes1->col(n).eval(), s.modes2->col(n).eval(),
                                       k.axis1().step());
    EXPECT_NEAR(std::abs(overlap), 1.0, 1e-8);
  }
}

TEST(DecomposeSvd, RejectsUnnormalizedKernel) {
  const auto k = sample_gaussian(kWorkingPoint, 50);
  const SpectralKernel doubled(k.axis1(), k.axis2(), 2.0 * k.values());
  EXPECT_THROW(decompose_svd(doubled), NotNormalized);
  EXPECT_THROW(decompose_svd(k, {0.0, false}), InvalidParameter);
  EXPECT_THROW(decompose_svd(k, {1.0, false}), InvalidParameter);
}

TEST(DecomposeSvd, InvariantUnderRescaling) {
  const auto k = sample_gaussian(GaussianParams::from_variances(9.0, 1.5, 0.6), 150);
  const auto base = decompose_svd(k);
  for (Complex c : {Complex(1e-3, 0), Complex(-5, 2), Complex(0, 40)}) {
    const auto scaled = decompose_svd(normalize(SpectralKernel(k.axis1(), k.axis2(), c * k.values())));
    ASSERT_EQ(scaled.size(), base.size());
    for (std::size_t n = 0; n < base.size(); ++n) {
      EXPECT_NEAR(scaled.eigenvalues[n], base.eigenvalues[n], 1e-12);
    }
  }
}

TEST(Mehler, GammaAtWorkingPoint) {
  // a = c = 0.26, b = 0.24: gamma = (-0.26 + sqrt(0.26^2 - 0.24^2)) / 0.24 = -2/3
  EXPECT_NEAR(mehler_gamma(kWorkingPoint), -2.0 / 3.0, 1e-14);
  EXPECT_NEAR(mehler_ratio(kWorkingPoint), 4.0 / 9.0, 1e-14);
  // (1 + q) / (1 - q) = 13/5, also (sigma_x/sigma_y + sigma_y/sigma_x) / 2
  EXPECT_NEAR(mehler_schmidt_number(kWorkingPoint), 2.6, 1e-13);
}

TEST(Mehler, SeparableCases) {
  for (const auto& p : {GaussianParams::from_variances(25.0, 1.0, 0.0),
                        GaussianParams{2.0, 2.0, 0.7}}) {
    const auto s = decompose_mehler(p, 10);
    ASSERT_EQ(s.size(), 1u);
    EXPECT_EQ(s.eigenvalues[0], 1.0);
    EXPECT_EQ(schmidt_number(s), 1.0);
  }
}

TEST(Mehler, TailFoldedIntoResidual) {
  const auto s = decompose_mehler(kWorkingPoint, 5);
  EXPECT_EQ(s.size(), 6u);
  EXPECT_NEAR(s.truncation_residual, std::pow(4.0 / 9.0, 6), 1e-15);
  s.validate(1e-14);
  const auto t = decompose_mehler_to_tolerance(kWorkingPoint, 1e-9);
  EXPECT_LE(t.truncation_residual, 1e-9);
  EXPECT_GT(t.truncation_residual + t.eigenvalues.back(), 1e-9);
}

TEST(Mehler, MatchesSvdAtWorkingPoint) {
  const auto svd = decompose_svd(sample_gaussian(kWorkingPoint, 600));
  const auto mehler = decompose_mehler(kWorkingPoint, svd.size() + 10);
  for (std::size_t n = 0; n < svd.size(); ++n) {
    EXPECT_NEAR(svd.eigenvalues[n], mehler.eigenvalues[n], 1e-6) << n;
  }
  EXPECT_NEAR(schmidt_number(svd), mehler_schmidt_number(kWorkingPoint), 1e-5 * 2.6);
}

TEST(Mehler, MatchesSvdOnRandomParameters) {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> vx(1.0, 100.0), vy(0.5, 4.0), th(0.01, kPi / 2 - 0.01);
  for (int trial = 0; trial < 5; ++trial) {
    const auto p = GaussianParams::from_variances(vx(rng), vy(rng), th(rng));
    const auto svd = decompose_svd(sample_gaussian(p, 500));
    const auto mehler = decompose_mehler(p, svd.size() + 10);
    for (std::size_t n = 0; n < mehler.size() && mehler.eigenvalues[n] > 1e-8; ++n) {
      const double s = n < svd.size() ? svd.eigenvalues[n] : 0.0;
      EXPECT_NEAR(s, mehler.eigenvalues[n], 1e-6);
    }
    const double k = mehler_schmidt_number(p);
    EXPECT_NEAR(schmidt_number(svd), k, 1e-5 * k);
  }
}

TEST(SchmidtNumber, SimpleSpectra) {
  EXPECT_DOUBLE_EQ(schmidt_number({{1.0}, {}, {}, 0.0}), 1.0);
  EXPECT_DOUBLE_EQ(schmidt_number({{0.5, 0.5}, {}, {}, 0.0}), 2.0);
}

TEST(SchmidtNumber, IncreasesTowardsQuarterTurn) {
  double previous = 0.0;
  for (int i = 0; i <= 10; ++i) {
    const double theta = kPi / 4 * i / 10.0;
    const auto s = decompose_svd(
        sample_gaussian(GaussianParams::from_variances(25.0, 1.0, theta), 200));
    const double k = schmidt_number(s);
    EXPECT_GE(k, 1.0 - 1e-12);
    if (i > 0) EXPECT_GT(k, previous) << "theta=" << theta;
    previous = k;
  }
}

TEST(SchmidtNumber, SeparableAtRotationEndpoints) {
  for (double theta : {0.0, kPi / 2}) {
    for (const auto& [vx, vy] : {std::pair{25.0, 1.0}, std::pair{3.0, 0.7}}) {
      const auto s = decompose_svd(sample_gaussian(GaussianParams::from_variances(vx, vy, theta), 200));
      EXPECT_NEAR(schmidt_number(s), 1.0, 1e-8);
    }
  }
}

TEST(ConvergenceStudy, WorkingPointConverges) {
  const auto report = convergence_study(kWorkingPoint, {100, 200, 400, 800});
  ASSERT_EQ(report.rows.size(), 4u);
  EXPECT_TRUE(report.converged);
  const double k_last = report.rows[3].schmidt_number;
  const double k_prev = report.rows[2].schmidt_number;
  EXPECT_LT(std::abs(k_last - k_prev), 1e-6);
  // Distance to the final value never grows with refinement.
  for (std::size_t i = 1; i < report.rows.size(); ++i) {
    EXPECT_LE(std::abs(report.rows[i].schmidt_number - k_last),
              std::abs(report.rows[i - 1].schmidt_number - k_last) + 1e-12);
  }
  EXPECT_NEAR(report.rows[3].leading[0], 5.0 / 9.0, 1e-9);
}

TEST(ConvergenceStudy, SeparableKernelStaysAtOne) {
  const auto report =
      convergence_study(GaussianParams::from_variances(25.0, 1.0, 0.0), {50, 100, 200});
  ASSERT_EQ(report.rows.size(), 3u);
  for (const auto& row : report.rows) EXPECT_NEAR(row.schmidt_number, 1.0, 1e-12);
  EXPECT_TRUE(report.converged);
}

TEST(ConvergenceStudy, RejectsNonIncreasingSizes) {
  EXPECT_THROW(convergence_study(kWorkingPoint, {200, 100}), InvalidParameter);
  EXPECT_THROW(convergence_study(kWorkingPoint, {}), InvalidParameter);
}

}  // namespace
}  // namespace pdc
