#pragma once

// Joint spectral distribution functions (SDFs) sampled on uniform grids.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

#include "pdcstats/errors.hpp"

namespace pdc {

using Complex = std::complex<double>;

/// Analytic Gaussian SDF: widths of signal and idler and the rotation of the
/// ellipse with respect to the signal axis.
struct GaussianParams {
  double sigma_x = 1.0;
  double sigma_y = 1.0;
  double theta = 0.0;

  static GaussianParams from_variances(double var_x, double var_y,
                                       double theta) {
    if (!(var_x > 0.0) || !(var_y > 0.0)) {
      throw InvalidParameter("Gaussian variances must be positive");
    }
    return {std::sqrt(var_x), std::sqrt(var_y), theta};
  }

  void validate() const {
    if (!(sigma_x > 0.0) || !(sigma_y > 0.0) || !std::isfinite(sigma_x) ||
        !std::isfinite(sigma_y)) {
      throw InvalidParameter("Gaussian widths must be positive and finite");
    }
    constexpr double slack = 1e-12;
    if (!(theta >= -slack && theta <= std::numbers::pi / 2 + slack)) {
      throw InvalidParameter("Gaussian angle must lie in [0, pi/2]");
    }
  }
};

/// Coefficients of the quadratic form a x^2 + 2 b x y + c y^2.
struct QuadraticForm {
  double a;
  double b;
  double c;

  double determinant() const { return a * c - b * b; }
};

inline QuadraticForm gaussian_coefficients(const GaussianParams& p) {
  p.validate();
  const double cos2 = std::cos(p.theta) * std::cos(p.theta);
  const double sin2 = std::sin(p.theta) * std::sin(p.theta);
  const double sin_double = std::sin(2.0 * p.theta);
  const double vx = p.sigma_x * p.sigma_x;
  const double vy = p.sigma_y * p.sigma_y;
  return {
      cos2 / (2.0 * vx) + sin2 / (2.0 * vy),
      -sin_double / (4.0 * vx) + sin_double / (4.0 * vy),
      sin2 / (2.0 * vx) + cos2 / (2.0 * vy),
  };
}

/// Interval [lo, hi] split into n equal cells, sampled at cell midpoints.
struct UniformAxis {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t n = 1;

  double step() const { return (hi - lo) / static_cast<double>(n); }
  double at(std::size_t i) const {
    return lo + (static_cast<double>(i) + 0.5) * step();
  }
  std::vector<double> points() const {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = at(i);
    return out;
  }

  void validate() const {
    if (n == 0 || !std::isfinite(lo) || !std::isfinite(hi) || !(hi > lo)) {
      throw InvalidParameter("axis must have n >= 1 and finite lo < hi");
    }
  }

  friend bool operator==(const UniformAxis&, const UniformAxis&) = default;
};

struct GridSpec {
  UniformAxis axis1;
  UniformAxis axis2;

  /// Square grid of n x n cells covering +-extent * max(sigma) on both axes.
  static GridSpec for_gaussian(const GaussianParams& p, std::size_t n,
                               double extent_sigmas = 7.0) {
    const double half = extent_sigmas * std::max(p.sigma_x, p.sigma_y);
    return {{-half, half, n}, {-half, half, n}};
  }
};

/// Tabulated complex kernel f(w1, w2) on a uniform midpoint grid.
class SpectralKernel {
 public:
  SpectralKernel(UniformAxis axis1, UniformAxis axis2, Eigen::MatrixXcd values)
      : axis1_(axis1), axis2_(axis2), values_(std::move(values)) {
    axis1_.validate();
    axis2_.validate();
    if (static_cast<std::size_t>(values_.rows()) != axis1_.n ||
        static_cast<std::size_t>(values_.cols()) != axis2_.n) {
      throw DimensionMismatch(
          "kernel values are " + std::to_string(values_.rows()) + "x" +
          std::to_string(values_.cols()) + " but axes have " +
          std::to_string(axis1_.n) + " and " + std::to_string(axis2_.n) +
          " points");
    }
  }

  const UniformAxis& axis1() const { return axis1_; }
  const UniformAxis& axis2() const { return axis2_; }
  const Eigen::MatrixXcd& values() const { return values_; }

  /// Quadrature cell area dw1 * dw2.
  double cell_weight() const { return axis1_.step() * axis2_.step(); }

  /// sqrt(sum |f|^2 dw1 dw2)
  double weighted_norm() const {
    return values_.norm() * std::sqrt(cell_weight());
  }

  bool is_real() const { return (values_.imag().array() == 0.0).all(); }

  /// Largest |f| on the outermost rows and columns relative to max |f|.
  double boundary_ratio() const {
    const Eigen::MatrixXd mag = values_.cwiseAbs();
    const double peak = mag.maxCoeff();
    if (peak == 0.0) return 0.0;
    const Eigen::Index r = mag.rows() - 1;
    const Eigen::Index c = mag.cols() - 1;
    const double edge = std::max({mag.row(0).maxCoeff(), mag.row(r).maxCoeff(),
                                  mag.col(0).maxCoeff(), mag.col(c).maxCoeff()});
    return edge / peak;
  }

 private:
  UniformAxis axis1_;
  UniformAxis axis2_;
  Eigen::MatrixXcd values_;
};

/// Rescales the kernel to unit weighted L2 norm.
inline SpectralKernel normalize(const SpectralKernel& k) {
  const double norm = k.weighted_norm();
  if (norm == 0.0) throw ZeroKernel("cannot normalize an all-zero kernel");
  if (!std::isfinite(norm)) {
    throw NumericError("kernel contains non-finite values");
  }
  Eigen::MatrixXcd scaled = k.values() / norm;
  SpectralKernel out(k.axis1(), k.axis2(), std::move(scaled));
  // One refinement step brings the norm to within a few ulp of 1.
  const double residual = out.weighted_norm();
  if (residual != 1.0) {
    Eigen::MatrixXcd refined = out.values() / residual;
    return SpectralKernel(k.axis1(), k.axis2(), std::move(refined));
  }
  return out;
}

/// Relative boundary magnitude above which a sampled kernel is flagged.
inline constexpr double kBoundaryTolerance = 1e-8;

/// Samples the Gaussian SDF at the grid midpoints and normalizes it.
inline SpectralKernel sample_gaussian(const GaussianParams& p,
                                      const GridSpec& grid,
                                      Warnings* warnings = nullptr) {
  const QuadraticForm q = gaussian_coefficients(p);
  if (grid.axis1.n < 2 || grid.axis2.n < 2) {
    throw InvalidParameter("Gaussian sampling needs at least 2 points per axis");
  }
  grid.axis1.validate();
  grid.axis2.validate();

  const double prefactor =
      1.0 / std::sqrt(std::numbers::pi * p.sigma_x * p.sigma_y);
  const auto n1 = static_cast<Eigen::Index>(grid.axis1.n);
  const auto n2 = static_cast<Eigen::Index>(grid.axis2.n);
  Eigen::MatrixXcd values(n1, n2);
  for (Eigen::Index j = 0; j < n2; ++j) {
    const double y = grid.axis2.at(static_cast<std::size_t>(j));
    for (Eigen::Index i = 0; i < n1; ++i) {
      const double x = grid.axis1.at(static_cast<std::size_t>(i));
      values(i, j) =
          prefactor * std::exp(-q.a * x * x - 2.0 * q.b * x * y - q.c * y * y);
    }
  }
  SpectralKernel raw(grid.axis1, grid.axis2, std::move(values));
  const double ratio = raw.boundary_ratio();
  if (ratio > kBoundaryTolerance) {
    warn(warnings, WarningCode::DomainTruncation,
         "Gaussian kernel reaches " + std::to_string(ratio) +
             " of its peak on the grid boundary; widen the sampling range");
  }
  return normalize(raw);
}

inline SpectralKernel sample_gaussian(const GaussianParams& p, std::size_t n,
                                      Warnings* warnings = nullptr) {
  return sample_gaussian(p, GridSpec::for_gaussian(p, n), warnings);
}

}  // namespace pdc
