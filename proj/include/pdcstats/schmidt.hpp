#pragma once

// Schmidt decomposition of a spectral kernel into a single sum of orthonormal
// mode pairs. Two routes are provided: dense SVD of the sampled kernel, which
// works for any tabulated SDF, and the closed form for Gaussian kernels that
// follows from Mehler's formula.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "pdcstats/sdf.hpp"

namespace pdc {

struct SchmidtSpectrum {
  /// lambda_0 >= lambda_1 >= ... >= 0
  std::vector<double> eigenvalues;
  /// Discretized mode functions, one column per retained eigenvalue,
  /// orthonormal under the weighted inner product of the kernel's axes.
  std::optional<Eigen::MatrixXcd> modes1;
  std::optional<Eigen::MatrixXcd> modes2;
  /// 1 - sum of retained eigenvalues.
  double truncation_residual = 0.0;

  std::size_t size() const { return eigenvalues.size(); }

  /// Throws NumericError if the ordering or normalization invariants fail.
  void validate(double tolerance = 1e-9) const {
    if (eigenvalues.empty()) throw NumericError("empty Schmidt spectrum");
    double sum = 0.0;
    for (std::size_t i = 0; i < eigenvalues.size(); ++i) {
      if (!(eigenvalues[i] >= 0.0)) {
        throw NumericError("negative Schmidt eigenvalue");
      }
      if (i > 0 && eigenvalues[i] > eigenvalues[i - 1]) {
        throw NumericError("Schmidt eigenvalues not sorted");
      }
      sum += eigenvalues[i];
    }
    if (std::abs(sum + truncation_residual - 1.0) > tolerance) {
      throw NumericError("Schmidt eigenvalues do not sum to one");
    }
  }
};

inline constexpr double kDefaultEpsLambda = 1e-9;
/// Maximum deviation of the weighted kernel norm from 1 accepted by the SVD route.
inline constexpr double kNormalizationTolerance = 1e-6;

struct SvdOptions {
  double eps_lambda = kDefaultEpsLambda;
  bool keep_modes = false;
};

namespace detail {

/// Keeps the leading eigenvalues until their sum reaches 1 - eps.
inline SchmidtSpectrum truncate_spectrum(std::vector<double> lambda,
                                         double eps_lambda) {
  double total = 0.0;
  for (double l : lambda) total += l;
  for (double& l : lambda) l /= total;

  std::size_t keep = 0;
  double cumulative = 0.0;
  while (keep < lambda.size() && (keep == 0 || cumulative < 1.0 - eps_lambda)) {
    cumulative += lambda[keep];
    ++keep;
  }
  double residual = 0.0;
  for (std::size_t i = lambda.size(); i-- > keep;) residual += lambda[i];
  lambda.resize(keep);
  return {std::move(lambda), std::nullopt, std::nullopt, residual};
}

template <typename Matrix>
SchmidtSpectrum svd_spectrum(const Matrix& m, const SpectralKernel& k,
                             const SvdOptions& opts) {
  const unsigned int flags =
      opts.keep_modes ? (Eigen::ComputeThinU | Eigen::ComputeThinV) : 0u;
  Eigen::BDCSVD<Matrix> svd(m, flags);
  const auto& sv = svd.singularValues();
  const double w = k.cell_weight();
  std::vector<double> lambda(static_cast<std::size_t>(sv.size()));
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    lambda[static_cast<std::size_t>(i)] = sv(i) * sv(i) * w;
  }
  SchmidtSpectrum out = truncate_spectrum(std::move(lambda), opts.eps_lambda);
  if (opts.keep_modes) {
    const auto keep = static_cast<Eigen::Index>(out.size());
    const double s1 = std::sqrt(k.axis1().step());
    const double s2 = std::sqrt(k.axis2().step());
    out.modes1 = Eigen::MatrixXcd(svd.matrixU().leftCols(keep).template cast<Complex>() / s1);
    out.modes2 = Eigen::MatrixXcd(
        svd.matrixV().leftCols(keep).template cast<Complex>().conjugate() / s2);
  }
  return out;
}

}  // namespace detail

/// Schmidt spectrum of a normalized kernel via dense SVD of the sampled matrix.
/// lambda_n = s_n^2 dw1 dw2 for the singular values s_n of f(w1_i, w2_j).
inline SchmidtSpectrum decompose_svd(const SpectralKernel& k,
                                     const SvdOptions& opts = {}) {
  if (!(opts.eps_lambda > 0.0 && opts.eps_lambda < 1.0)) {
    throw InvalidParameter("eps_lambda must lie in (0, 1)");
  }
  const double norm = k.weighted_norm();
  if (!(std::abs(norm - 1.0) <= kNormalizationTolerance)) {
    throw NotNormalized("kernel weighted norm is " + std::to_string(norm) +
                        ", expected 1");
  }
  if (k.is_real()) {
    const Eigen::MatrixXd real = k.values().real();
    return detail::svd_spectrum(real, k, opts);
  }
  return detail::svd_spectrum(k.values(), k, opts);
}

/// Contractive root gamma of b g^2 + 2 sqrt(ac) g + b = 0 in the rescaled
/// Mehler form; the singular values of the Gaussian kernel fall off as |gamma|^n.
inline double mehler_gamma(const GaussianParams& p) {
  const QuadraticForm q = gaussian_coefficients(p);
  const double det = q.determinant();
  if (!(q.a > 0.0 && q.c > 0.0 && det > 0.0)) {
    throw GammaOutOfRange("quadratic form of the Gaussian is not positive definite");
  }
  if (q.b == 0.0) return 0.0;
  // (-sqrt(ac) + sqrt(ac - b^2)) / b, rationalized to avoid cancellation.
  const double gamma = -q.b / (std::sqrt(q.a * q.c) + std::sqrt(det));
  if (!(std::abs(gamma) < 1.0)) {
    throw GammaOutOfRange("|gamma| >= 1 for the given Gaussian parameters");
  }
  return gamma;
}

/// Geometric ratio q of lambda_n = (1 - q) q^n.
inline double mehler_ratio(const GaussianParams& p) {
  const double g = mehler_gamma(p);
  return g * g;
}

/// Analytic spectrum with modes 0..n_max; the geometric tail beyond n_max is
/// carried in truncation_residual.
inline SchmidtSpectrum decompose_mehler(const GaussianParams& p,
                                        std::size_t n_max) {
  const double q = mehler_ratio(p);
  if (q == 0.0) return {{1.0}, std::nullopt, std::nullopt, 0.0};
  SchmidtSpectrum out;
  out.eigenvalues.resize(n_max + 1);
  double power = 1.0;
  for (std::size_t n = 0; n <= n_max; ++n) {
    out.eigenvalues[n] = (1.0 - q) * power;
    power *= q;
  }
  out.truncation_residual = power;
  return out;
}

/// Analytic spectrum truncated at the first n with q^(n+1) <= eps_lambda.
inline SchmidtSpectrum decompose_mehler_to_tolerance(
    const GaussianParams& p, double eps_lambda = kDefaultEpsLambda) {
  if (!(eps_lambda > 0.0 && eps_lambda < 1.0)) {
    throw InvalidParameter("eps_lambda must lie in (0, 1)");
  }
  const double q = mehler_ratio(p);
  if (q == 0.0) return {{1.0}, std::nullopt, std::nullopt, 0.0};
  std::size_t n_max = 0;
  double tail = q;
  while (tail > eps_lambda) {
    tail *= q;
    ++n_max;
  }
  return decompose_mehler(p, n_max);
}

/// K = 1 / sum lambda_n^2, the effective number of contributing modes.
inline double schmidt_number(const SchmidtSpectrum& s) {
  double sum_sq = 0.0;
  for (double l : s.eigenvalues) sum_sq += l * l;
  return 1.0 / sum_sq;
}

/// K = (1 + q) / (1 - q) for an untruncated geometric spectrum.
inline double mehler_schmidt_number(const GaussianParams& p) {
  const double q = mehler_ratio(p);
  return (1.0 + q) / (1.0 - q);
}

enum class DecompositionMethod { Svd, Mehler };

/// Spectrum of a Gaussian SDF by either route; the SVD route samples an
/// n x n grid covering +-extent_sigmas * max(sigma).
inline SchmidtSpectrum decompose_gaussian(const GaussianParams& p,
                                          DecompositionMethod method,
                                          std::size_t grid_size,
                                          double eps_lambda = kDefaultEpsLambda,
                                          double extent_sigmas = 7.0,
                                          Warnings* warnings = nullptr) {
  if (method == DecompositionMethod::Mehler) {
    return decompose_mehler_to_tolerance(p, eps_lambda);
  }
  const auto kernel =
      sample_gaussian(p, GridSpec::for_gaussian(p, grid_size, extent_sigmas), warnings);
  return decompose_svd(kernel, {eps_lambda, false});
}

struct ConvergenceRow {
  std::size_t grid_size;
  std::array<double, 10> leading{};  // lambda_0..lambda_9, zero padded
  double schmidt_number;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  bool converged = false;
};

/// Decomposes the Gaussian at each grid size and flags convergence when the
/// Schmidt numbers at the last two sizes agree within k_tolerance.
inline ConvergenceReport convergence_study(const GaussianParams& p,
                                           const std::vector<std::size_t>& grid_sizes,
                                           double eps_lambda = kDefaultEpsLambda,
                                           double k_tolerance = 1e-6,
                                           double extent_sigmas = 7.0) {
  if (grid_sizes.empty()) throw InvalidParameter("no grid sizes given");
  for (std::size_t i = 1; i < grid_sizes.size(); ++i) {
    if (grid_sizes[i] <= grid_sizes[i - 1]) {
      throw InvalidParameter("grid sizes must be strictly increasing");
    }
  }
  ConvergenceReport report;
  for (std::size_t n : grid_sizes) {
    const auto kernel =
        sample_gaussian(p, GridSpec::for_gaussian(p, n, extent_sigmas));
    const auto spectrum = decompose_svd(kernel, {eps_lambda, false});
    ConvergenceRow row{n, {}, schmidt_number(spectrum)};
    const std::size_t m = std::min(row.leading.size(), spectrum.size());
    std::copy_n(spectrum.eigenvalues.begin(), m, row.leading.begin());
    report.rows.push_back(row);
  }
  if (report.rows.size() >= 2) {
    const auto& last = report.rows.back();
    const auto& prev = report.rows[report.rows.size() - 2];
    report.converged =
        std::abs(last.schmidt_number - prev.schmidt_number) < k_tolerance;
  }
  return report;
}

}  // namespace pdc
