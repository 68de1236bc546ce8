#pragma once

// Photon-number statistics of a bank of independent two-mode squeezers.
//
// Each squeezer contributes a thermal marginal p(n) = sech^2 r tanh^2n r; the
// total distribution is the convolution of all marginals. The convolution is
// available both as a direct discrete convolution and as a product of the
// generating functions g_k(z) = sech^2 r_k / (1 - z tanh^2 r_k).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "pdcstats/errors.hpp"
#include "pdcstats/schmidt.hpp"

namespace pdc {

/// Truncated photon-number distribution. `tail` is the probability mass
/// beyond the last stored entry.
struct Pnd {
  std::vector<double> probs;
  double tail = 0.0;

  std::size_t n_max() const { return probs.empty() ? 0 : probs.size() - 1; }

  double mass() const {
    double s = 0.0;
    for (double p : probs) s += p;
    return s;
  }

  double mean() const {
    double s = 0.0;
    for (std::size_t n = 0; n < probs.size(); ++n) {
      s += static_cast<double>(n) * probs[n];
    }
    return s;
  }

  void validate(double tolerance = 1e-12) const {
    for (double p : probs) {
      if (!(p >= 0.0) || !std::isfinite(p)) {
        throw NumericError("photon-number distribution has a negative entry");
      }
    }
    if (!(tail >= 0.0) || mass() > 1.0 + tolerance) {
      throw NumericError("photon-number distribution mass exceeds one");
    }
  }
};

/// Either a fixed cutoff n_max, or the smallest cutoff whose tail mass does
/// not exceed tail_target.
struct Truncation {
  std::optional<std::size_t> n_max;
  double tail_target = 1e-10;

  static Truncation fixed(std::size_t n) { return {n, 0.0}; }
  static Truncation adaptive(double tail = 1e-10) { return {std::nullopt, tail}; }
};

inline constexpr std::size_t kMaxPhotonNumber = std::size_t{1} << 22;

namespace detail {

/// Builds a Pnd from exact leading probabilities of a unit-mass distribution.
inline Pnd finish(std::vector<double> probs) {
  double mass = 0.0;
  for (double p : probs) mass += p;
  return {std::move(probs), std::max(0.0, 1.0 - mass)};
}

/// Smallest prefix of `probs` whose complement mass is within target.
inline std::optional<Pnd> trim_to_tail(const std::vector<double>& probs,
                                       double target) {
  double mass = 0.0;
  for (std::size_t n = 0; n < probs.size(); ++n) {
    mass += probs[n];
    if (1.0 - mass <= target) {
      return finish(std::vector<double>(probs.begin(),
                                        probs.begin() + static_cast<std::ptrdiff_t>(n + 1)));
    }
  }
  return std::nullopt;
}

/// Evaluates `generate(n_max)` with a fixed cutoff, or doubles the cutoff
/// until the tail target is met and then trims to the minimal prefix.
template <typename Generate>
Pnd truncate(const Truncation& t, std::size_t initial, Generate&& generate) {
  if (t.n_max) return finish(generate(*t.n_max));
  if (!(t.tail_target > 0.0)) {
    throw InvalidParameter("tail target must be positive");
  }
  for (std::size_t n = std::max<std::size_t>(initial, 16); n <= kMaxPhotonNumber;
       n *= 2) {
    if (auto out = trim_to_tail(generate(n), t.tail_target)) return *out;
  }
  throw NumericError("photon-number cutoff exceeds supported range");
}

}  // namespace detail

/// Squeezing strengths r_k of independent two-mode squeezers. The phases are
/// carried along but never enter a photon-number distribution.
struct SqueezerBank {
  std::vector<double> strengths;
  std::vector<double> phases;

  std::size_t size() const { return strengths.size(); }
};

/// r_k = C sqrt(lambda_k)
inline SqueezerBank bank_from_spectrum(const SchmidtSpectrum& s, double coupling) {
  if (!(coupling >= 0.0) || !std::isfinite(coupling)) {
    throw InvalidParameter("coupling must be finite and non-negative");
  }
  SqueezerBank bank;
  bank.strengths.reserve(s.size());
  for (double l : s.eigenvalues) bank.strengths.push_back(coupling * std::sqrt(l));
  bank.phases.assign(s.size(), 0.0);
  return bank;
}

inline double mean_photon_number(const SqueezerBank& bank) {
  double n = 0.0;
  for (double r : bank.strengths) {
    const double s = std::sinh(r);
    n += s * s;
  }
  return n;
}

namespace detail {

struct ThermalFactor {
  double weight;  // sech^2 r
  double ratio;   // tanh^2 r
};

inline ThermalFactor thermal_factor(double r) {
  if (!(r >= 0.0) || !std::isfinite(r)) {
    throw InvalidParameter("squeezing strength must be finite and non-negative");
  }
  const double sech = 1.0 / std::cosh(r);
  const double tanh = std::tanh(r);
  return {sech * sech, tanh * tanh};
}

inline Pnd geometric_pnd(const ThermalFactor& f, const Truncation& t) {
  const auto generate = [&](std::size_t n_max) {
    std::vector<double> p(n_max + 1);
    double power = 1.0;
    for (auto& v : p) {
      v = f.weight * power;
      power *= f.ratio;
    }
    return p;
  };
  std::size_t n_max = 0;
  if (t.n_max) {
    n_max = *t.n_max;
  } else if (f.ratio != 0.0) {
    if (!(t.tail_target > 0.0)) {
      throw InvalidParameter("tail target must be positive");
    }
    const double n = std::ceil(std::log(t.tail_target) / std::log(f.ratio));
    if (!(n <= static_cast<double>(kMaxPhotonNumber))) {
      throw NumericError("thermal cutoff exceeds supported range");
    }
    n_max = n < 1.0 ? 0 : static_cast<std::size_t>(n) - 1;
    while (std::pow(f.ratio, static_cast<double>(n_max + 1)) > t.tail_target) ++n_max;
  }
  // The geometric tail ratio^(n_max+1) is exact, no need for 1 - sum.
  return {generate(n_max), std::pow(f.ratio, static_cast<double>(n_max + 1))};
}

}  // namespace detail

/// Single-mode thermal marginal of a two-mode squeezer with strength r.
inline Pnd thermal_pnd(double r, const Truncation& t = Truncation::adaptive()) {
  return detail::geometric_pnd(detail::thermal_factor(r), t);
}

/// Full discrete convolution of the inputs, optionally truncated at n_max.
/// The output tail is the exact missing mass 1 - prod(1 - tail_i) plus any
/// mass removed by the final truncation.
inline Pnd convolve_direct(std::span<const Pnd> pnds,
                           std::optional<std::size_t> n_max = {}) {
  if (pnds.empty()) throw InvalidParameter("convolution needs at least one input");
  std::vector<double> acc = pnds.front().probs;
  double log_kept = std::log1p(-pnds.front().tail);
  for (std::size_t k = 1; k < pnds.size(); ++k) {
    const auto& next = pnds[k].probs;
    std::vector<double> out(acc.size() + next.size() - 1, 0.0);
    for (std::size_t i = 0; i < acc.size(); ++i) {
      if (acc[i] == 0.0) continue;
      for (std::size_t j = 0; j < next.size(); ++j) out[i + j] += acc[i] * next[j];
    }
    acc = std::move(out);
    log_kept += std::log1p(-pnds[k].tail);
  }
  double tail = -std::expm1(log_kept);
  if (n_max && acc.size() > *n_max + 1) {
    for (std::size_t n = *n_max + 1; n < acc.size(); ++n) tail += acc[n];
    acc.resize(*n_max + 1);
  }
  return {std::move(acc), tail};
}

/// Coefficients of prod_k g_k(z) up to z^n_max by truncated power-series
/// multiplication; each factor is applied as e(n) = sech^2 r c(n) + tanh^2 r e(n-1).
inline Pnd convolve_gf(const SqueezerBank& bank,
                       const Truncation& t = Truncation::adaptive()) {
  std::vector<detail::ThermalFactor> factors;
  factors.reserve(bank.size());
  double mean = 0.0;
  for (double r : bank.strengths) {
    factors.push_back(detail::thermal_factor(r));
    mean += std::sinh(r) * std::sinh(r);
  }
  const auto generate = [&](std::size_t n_max) {
    std::vector<double> c(n_max + 1, 0.0);
    c[0] = 1.0;
    for (const auto& f : factors) {
      if (f.ratio == 0.0) continue;
      double prev = 0.0;
      for (auto& v : c) {
        prev = f.weight * v + f.ratio * prev;
        v = prev;
      }
    }
    return c;
  };
  return detail::truncate(t, static_cast<std::size_t>(4.0 * mean) + 16, generate);
}

/// Poisson distribution with the given mean.
inline Pnd reference_poisson(double mean, const Truncation& t = Truncation::adaptive()) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw InvalidParameter("mean must be finite and non-negative");
  }
  const auto generate = [&](std::size_t n_max) {
    std::vector<double> p(n_max + 1, 0.0);
    if (mean == 0.0) {
      p[0] = 1.0;
      return p;
    }
    const double log_mean = std::log(mean);
    for (std::size_t n = 0; n <= n_max; ++n) {
      const double k = static_cast<double>(n);
      p[n] = std::exp(-mean + k * log_mean - std::lgamma(k + 1.0));
    }
    return p;
  };
  return detail::truncate(t, static_cast<std::size_t>(mean + 10.0 * std::sqrt(mean)),
                          generate);
}

/// Thermal (Bose-Einstein) distribution nbar^n / (1 + nbar)^(n+1).
inline Pnd reference_thermal(double mean, const Truncation& t = Truncation::adaptive()) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw InvalidParameter("mean must be finite and non-negative");
  }
  return detail::geometric_pnd({1.0 / (1.0 + mean), mean / (1.0 + mean)}, t);
}

struct Distance {
  /// sum_n |p1(n) - p2(n)| over the stored entries.
  double value;
  /// Worst-case contribution of the unstored tails: tail1 + tail2.
  double slack;
};

inline Distance variational_distance(const Pnd& p1, const Pnd& p2) {
  const std::size_t n = std::max(p1.probs.size(), p2.probs.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = i < p1.probs.size() ? p1.probs[i] : 0.0;
    const double b = i < p2.probs.size() ? p2.probs[i] : 0.0;
    sum += std::abs(a - b);
  }
  return {sum, p1.tail + p2.tail};
}

/// Joint signal+idler distribution: p_joint(2n) = p(n), odd entries zero.
inline Pnd joint_pnd(const Pnd& p) {
  std::vector<double> out(p.probs.empty() ? 0 : 2 * p.probs.size() - 1, 0.0);
  for (std::size_t n = 0; n < p.probs.size(); ++n) out[2 * n] = p.probs[n];
  return {std::move(out), p.tail};
}

}  // namespace pdc
