#pragma once

// Distance of the predicted photon-number distribution from thermal and
// Poissonian references along a family of Gaussian SDFs, with the coupling
// re-solved at every point so that all distributions share one mean.

#include <cstddef>
#include <vector>

#include "pdcstats/coupling.hpp"
#include "pdcstats/schmidt.hpp"
#include "pdcstats/stats.hpp"

namespace pdc {

enum class SweepVariable { Theta, VarianceX };

struct SweepOptions {
  DecompositionMethod method = DecompositionMethod::Svd;
  std::size_t grid_size = 1500;
  double eps_lambda = kDefaultEpsLambda;
  double extent_sigmas = 7.0;
  double mean = 1.0;
  double tail = 1e-10;
};

struct SweepRow {
  double x;  // theta or sigma_x^2
  double schmidt_number;
  double coupling;
  double delta_thermal;
  double delta_poisson;
};

struct Comparison {
  Pnd pnd;
  Pnd thermal;
  Pnd poisson;
  Distance to_thermal;
  Distance to_poisson;
};

/// Predicted distribution for a given coupling together with the thermal and
/// Poisson references of equal mean, all on a common cutoff.
inline Comparison compare_with_references(const SqueezerBank& bank, double tail) {
  const double mean = mean_photon_number(bank);
  const Pnd adaptive = convolve_gf(bank, Truncation::adaptive(tail));
  const Pnd thermal_adaptive = reference_thermal(mean, Truncation::adaptive(tail));
  const std::size_t n_max = std::max(adaptive.n_max(), thermal_adaptive.n_max());
  Comparison c{convolve_gf(bank, Truncation::fixed(n_max)),
               reference_thermal(mean, Truncation::fixed(n_max)),
               reference_poisson(mean, Truncation::fixed(n_max)),
               {},
               {}};
  c.to_thermal = variational_distance(c.pnd, c.thermal);
  c.to_poisson = variational_distance(c.pnd, c.poisson);
  return c;
}

inline SweepRow sweep_point(const GaussianParams& p, double x,
                            const SweepOptions& opts, Warnings* warnings = nullptr) {
  const auto spectrum = decompose_gaussian(p, opts.method, opts.grid_size,
                                           opts.eps_lambda, opts.extent_sigmas, warnings);
  const double coupling = solve_coupling(spectrum, opts.mean);
  const auto cmp = compare_with_references(bank_from_spectrum(spectrum, coupling), opts.tail);
  return {x, schmidt_number(spectrum), coupling, cmp.to_thermal.value,
          cmp.to_poisson.value};
}

/// One row per value; `templ` supplies the parameters that are not swept.
inline std::vector<SweepRow> distance_sweep(const GaussianParams& templ,
                                            SweepVariable variable,
                                            const std::vector<double>& values,
                                            const SweepOptions& opts = {},
                                            Warnings* warnings = nullptr) {
  if (values.empty()) throw InvalidParameter("sweep range is empty");
  std::vector<SweepRow> rows;
  rows.reserve(values.size());
  for (double v : values) {
    GaussianParams p = templ;
    if (variable == SweepVariable::Theta) {
      p.theta = v;
    } else {
      if (!(v > 0.0)) throw InvalidParameter("swept variance must be positive");
      p.sigma_x = std::sqrt(v);
    }
    rows.push_back(sweep_point(p, v, opts, warnings));
  }
  return rows;
}

inline std::vector<double> linear_range(double start, double stop, std::size_t count) {
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) {
    out[i] = count == 1 ? start
                        : start + (stop - start) * static_cast<double>(i) /
                                      static_cast<double>(count - 1);
  }
  return out;
}

inline std::vector<double> log_range(double start, double stop, std::size_t count) {
  if (!(start > 0.0 && stop > 0.0)) {
    throw InvalidParameter("logarithmic range needs positive bounds");
  }
  auto out = linear_range(std::log(start), std::log(stop), count);
  for (auto& v : out) v = std::exp(v);
  return out;
}

}  // namespace pdc
