#pragma once

// Inference of the coupling constant C from measured mean photon numbers and
// the square-root law C = kappa sqrt(P) against pump power.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <string>
#include <vector>

#include "pdcstats/kernel_io.hpp"
#include "pdcstats/schmidt.hpp"

namespace pdc {

struct PowerMeasurement {
  double pump_power;
  double mean_n;
};

struct FitResult {
  std::vector<double> couplings;
  /// kappa in C = kappa sqrt(P)
  double scale = 0.0;
  /// RMS of C_i - kappa sqrt(P_i)
  double residual = 0.0;
};

namespace detail {

inline double mean_for_coupling(const SchmidtSpectrum& s, double coupling) {
  double n = 0.0;
  for (double l : s.eigenvalues) {
    const double v = std::sinh(coupling * std::sqrt(l));
    n += v * v;
  }
  return n;
}

inline double mean_derivative(const SchmidtSpectrum& s, double coupling) {
  double d = 0.0;
  for (double l : s.eigenvalues) {
    const double root = std::sqrt(l);
    d += root * std::sinh(2.0 * coupling * root);
  }
  return d;
}

}  // namespace detail

/// Unique C >= 0 with sum_k sinh^2(C sqrt(lambda_k)) = mean_n.
inline double solve_coupling(const SchmidtSpectrum& s, double mean_n) {
  if (!(mean_n >= 0.0) || !std::isfinite(mean_n)) {
    throw InvalidParameter("mean photon number must be finite and non-negative");
  }
  if (s.eigenvalues.empty() || !(s.eigenvalues.front() > 0.0)) {
    throw InvalidParameter("Schmidt spectrum has no positive eigenvalue");
  }
  if (mean_n == 0.0) return 0.0;

  // The leading mode alone already reaches mean_n at asinh(sqrt(mean_n)) / sqrt(lambda_0).
  double lo = 0.0;
  double hi = std::asinh(std::sqrt(mean_n)) / std::sqrt(s.eigenvalues.front()) + 1.0;
  while (hi - lo > 1e-12 * std::max(1.0, hi)) {
    const double mid = 0.5 * (lo + hi);
    if (detail::mean_for_coupling(s, mid) < mean_n) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  double c = 0.5 * (lo + hi);
  const double slope = detail::mean_derivative(s, c);
  if (slope > 0.0) {
    const double polished = c - (detail::mean_for_coupling(s, c) - mean_n) / slope;
    if (polished >= 0.0 &&
        std::abs(detail::mean_for_coupling(s, polished) - mean_n) <=
            std::abs(detail::mean_for_coupling(s, c) - mean_n)) {
      c = polished;
    }
  }
  const double residual = std::abs(detail::mean_for_coupling(s, c) - mean_n);
  if (!(residual < 1e-10 * (1.0 + mean_n))) {
    throw NumericError("coupling solve did not reach the requested accuracy");
  }
  return c;
}

/// Solves each measurement for its coupling and fits C = kappa sqrt(P) by
/// linear least squares through the origin.
inline FitResult fit_sqrt_law(const std::vector<PowerMeasurement>& series,
                              const SchmidtSpectrum& s) {
  if (series.size() < 2) {
    throw DegenerateSeries("square-root fit needs at least two measurements");
  }
  for (const auto& m : series) {
    if (!(m.pump_power > 0.0) || !std::isfinite(m.pump_power)) {
      throw InvalidParameter("pump power must be positive");
    }
    if (!(m.mean_n >= 0.0) || !std::isfinite(m.mean_n)) {
      throw InvalidParameter("mean photon number must be non-negative");
    }
  }
  const bool all_equal =
      std::all_of(series.begin(), series.end(), [&](const PowerMeasurement& m) {
        return m.pump_power == series.front().pump_power;
      });
  if (all_equal) throw DegenerateSeries("all pump powers are equal");

  FitResult fit;
  double num = 0.0;
  double den = 0.0;
  for (const auto& m : series) {
    const double c = solve_coupling(s, m.mean_n);
    fit.couplings.push_back(c);
    num += c * std::sqrt(m.pump_power);
    den += m.pump_power;
  }
  fit.scale = num / den;
  double sq = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double d = fit.couplings[i] - fit.scale * std::sqrt(series[i].pump_power);
    sq += d * d;
  }
  fit.residual = std::sqrt(sq / static_cast<double>(series.size()));
  return fit;
}

/// Reads `pump_power, mean_n` rows; a non-numeric first row is a header.
inline std::vector<PowerMeasurement> read_series_csv(std::istream& in) {
  std::vector<PowerMeasurement> out;
  std::string line;
  std::size_t lineno = 0;
  bool first_data = true;
  while (std::getline(in, line)) {
    ++lineno;
    const auto view = detail::trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto comma = view.find(',');
    if (comma == std::string_view::npos) {
      throw ParseError("expected `pump_power, mean_n`", lineno);
    }
    const auto power = detail::parse_real(view.substr(0, comma));
    const auto mean = detail::parse_real(view.substr(comma + 1));
    if (!power || !mean) {
      if (first_data && out.empty()) {
        first_data = false;
        continue;
      }
      throw ParseError("non-numeric measurement", lineno, power ? 2 : 1);
    }
    first_data = false;
    if (!(*power > 0.0)) throw ParseError("pump power must be positive", lineno, 1);
    if (!(*mean >= 0.0)) throw ParseError("mean photon number must be >= 0", lineno, 2);
    out.push_back({*power, *mean});
  }
  return out;
}

inline std::vector<PowerMeasurement> load_series(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open series file " + path.string());
  return read_series_csv(in);
}

}  // namespace pdc
