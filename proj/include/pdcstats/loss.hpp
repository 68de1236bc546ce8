#pragma once

// Binomial detection loss on photon-number distributions and its inversion by
// non-negative least squares.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <string>

#include "pdcstats/kernel_io.hpp"
#include "pdcstats/nnls.hpp"
#include "pdcstats/stats.hpp"

namespace pdc {

/// Efficiency below which inversion is flagged as ill-conditioned.
inline constexpr double kIllConditionedEfficiency = 0.1;

/// Column-stochastic map L(m|n) = C(n,m) eta^m (1-eta)^(n-m); row m is the
/// detected photon number, column n the incident one, so L is upper triangular.
struct LossMap {
  double efficiency = 1.0;
  Eigen::MatrixXd matrix;
};

inline void check_efficiency(double eta) {
  if (!(eta >= 0.0 && eta <= 1.0)) {
    throw EfficiencyOutOfRange("efficiency must lie in [0, 1], got " +
                               std::to_string(eta));
  }
}

inline LossMap make_loss_map(double eta, std::size_t n_max) {
  check_efficiency(eta);
  const auto size = static_cast<Eigen::Index>(n_max + 1);
  LossMap map{eta, Eigen::MatrixXd::Zero(size, size)};
  // Column n is column n-1 convolved with the Bernoulli pair (1-eta, eta).
  map.matrix(0, 0) = 1.0;
  for (Eigen::Index n = 1; n < size; ++n) {
    map.matrix(0, n) = (1.0 - eta) * map.matrix(0, n - 1);
    for (Eigen::Index m = 1; m <= n; ++m) {
      map.matrix(m, n) = (1.0 - eta) * map.matrix(m, n - 1) + eta * map.matrix(m - 1, n - 1);
    }
  }
  return map;
}

/// p'(m) = sum_{n >= m} L(m|n) p(n). The unstored tail keeps its mass.
inline Pnd apply_loss(const Pnd& p, double eta) {
  check_efficiency(eta);
  if (p.probs.empty()) return p;
  const LossMap map = make_loss_map(eta, p.n_max());
  const Eigen::VectorXd in = Eigen::Map<const Eigen::VectorXd>(
      p.probs.data(), static_cast<Eigen::Index>(p.probs.size()));
  const Eigen::VectorXd out = map.matrix.triangularView<Eigen::Upper>() * in;
  return {std::vector<double>(out.data(), out.data() + out.size()), p.tail};
}

struct LossInversion {
  Pnd pnd;
  /// ||L q - measured||_2 of the returned (renormalized) estimate.
  double residual = 0.0;
  /// 2-norm condition number of the loss map.
  double condition_number = 1.0;
  Warnings warnings;
};

/// Estimates the incident distribution q >= 0 minimizing ||L q - measured||.
inline LossInversion invert_loss(const Pnd& measured, double eta, std::size_t n_max) {
  check_efficiency(eta);
  if (eta == 0.0) {
    throw EfficiencyOutOfRange("loss cannot be inverted at zero efficiency");
  }
  if (measured.probs.empty()) throw InvalidParameter("measured distribution is empty");
  if (n_max + 1 < measured.probs.size()) {
    throw InvalidParameter("n_max must cover the measured distribution");
  }
  const LossMap map = make_loss_map(eta, n_max);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_max + 1));
  for (std::size_t m = 0; m < measured.probs.size(); ++m) {
    b(static_cast<Eigen::Index>(m)) = measured.probs[m];
  }

  LossInversion out;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(map.matrix);
  const auto& sv = svd.singularValues();
  out.condition_number = sv(0) / sv(sv.size() - 1);
  if (eta < kIllConditionedEfficiency) {
    out.warnings.push_back({WarningCode::IllConditioned,
                            "efficiency below 0.1, loss map condition number " +
                                format_double(out.condition_number)});
  }

  // A non-negative exact solution of the triangular system is the constrained
  // optimum; back-substitution keeps it accurate where the normal-equation
  // gradient used by the active-set method is too flat to steer.
  Eigen::VectorXd q = map.matrix.triangularView<Eigen::Upper>().solve(b);
  if (!(q.minCoeff() >= 0.0)) {
    const NnlsResult sol = nnls(map.matrix, b);
    if (!sol.converged) {
      out.warnings.push_back({WarningCode::NotConverged,
                              "non-negative least squares hit its iteration limit"});
    }
    q = sol.x;
  }
  const double total = q.sum();
  if (total > 1.0) q /= total;
  out.residual = (map.matrix * q - b).norm();
  out.pnd.probs.assign(q.data(), q.data() + q.size());
  out.pnd.tail = std::max(0.0, 1.0 - q.sum());
  return out;
}

/// Reads `n, p(n)` rows; a non-numeric first row is a header. Missing photon
/// numbers are zero.
inline Pnd read_pnd_csv(std::istream& in) {
  std::vector<double> probs;
  std::string line;
  std::size_t lineno = 0;
  bool seen_data = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto view = detail::trim(line);
    if (view.empty() || view.front() == '#') continue;
    const auto comma = view.find(',');
    if (comma == std::string_view::npos) throw ParseError("expected `n, p`", lineno);
    const auto n = detail::parse_real(view.substr(0, comma));
    const auto p = detail::parse_real(view.substr(comma + 1));
    if (!n || !p) {
      if (!seen_data) {
        seen_data = true;
        continue;
      }
      throw ParseError("non-numeric entry", lineno, n ? 2 : 1);
    }
    seen_data = true;
    if (*n < 0.0 || std::floor(*n) != *n) {
      throw ParseError("photon number must be a non-negative integer", lineno, 1);
    }
    if (!(*p >= 0.0)) throw ParseError("probability must be non-negative", lineno, 2);
    const auto idx = static_cast<std::size_t>(*n);
    if (idx >= probs.size()) probs.resize(idx + 1, 0.0);
    probs[idx] = *p;
  }
  if (probs.empty()) throw ParseError("no distribution entries", lineno);
  Pnd out{std::move(probs), 0.0};
  const double mass = out.mass();
  if (mass > 1.0 + 1e-9) throw ParseError("probabilities sum to more than one", 0);
  out.tail = std::max(0.0, 1.0 - mass);
  return out;
}

inline Pnd load_pnd(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open distribution file " + path.string());
  return read_pnd_csv(in);
}

}  // namespace pdc
