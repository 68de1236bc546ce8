#pragma once

// JSON and CSV serialization of results. Numbers in CSV use 17 significant
// digits; JSON relies on the shortest round-trip representation.

#include <json.hpp>

#include <cmath>
#include <ostream>
#include <vector>

#include "pdcstats/coupling.hpp"
#include "pdcstats/format.hpp"
#include "pdcstats/loss.hpp"
#include "pdcstats/schmidt.hpp"
#include "pdcstats/stats.hpp"
#include "pdcstats/sweep.hpp"

namespace pdc {

namespace detail {

inline void require_finite(double v) {
  if (!std::isfinite(v)) throw NumericError("refusing to write a non-finite value");
}

inline void require_finite(const std::vector<double>& v) {
  for (double x : v) require_finite(x);
}

}  // namespace detail

inline nlohmann::json to_json(const SchmidtSpectrum& s) {
  detail::require_finite(s.eigenvalues);
  const double k = schmidt_number(s);
  detail::require_finite(k);
  return {{"lambda", s.eigenvalues}, {"K", k}, {"residual", s.truncation_residual}};
}

inline nlohmann::json to_json(const Pnd& p) {
  detail::require_finite(p.probs);
  return {{"p", p.probs}, {"tail", p.tail}, {"mean", p.mean()}};
}

inline nlohmann::json to_json(const FitResult& f) {
  detail::require_finite(f.couplings);
  detail::require_finite(f.scale);
  detail::require_finite(f.residual);
  return {{"couplings", f.couplings}, {"scale", f.scale}, {"residual", f.residual}};
}

inline nlohmann::json to_json(const LossInversion& inv) {
  nlohmann::json j = to_json(inv.pnd);
  j["residual"] = inv.residual;
  // An exactly singular map has no finite condition number.
  j["condition_number"] = std::isfinite(inv.condition_number)
                              ? nlohmann::json(inv.condition_number)
                              : nlohmann::json(nullptr);
  nlohmann::json warnings = nlohmann::json::array();
  for (const auto& w : inv.warnings) {
    warnings.push_back({{"code", to_string(w.code)}, {"message", w.message}});
  }
  j["warnings"] = std::move(warnings);
  return j;
}

inline void write_pnd_csv(std::ostream& out, const Pnd& p) {
  detail::require_finite(p.probs);
  out << "n,p\n";
  for (std::size_t n = 0; n < p.probs.size(); ++n) {
    out << n << ',' << format_double(p.probs[n]) << '\n';
  }
}

inline void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows,
                            SweepVariable variable) {
  out << (variable == SweepVariable::Theta ? "theta" : "sigma_x2")
      << ",K,coupling,delta_thermal,delta_poisson\n";
  for (const auto& r : rows) {
    for (double v : {r.x, r.schmidt_number, r.coupling, r.delta_thermal, r.delta_poisson}) {
      detail::require_finite(v);
    }
    out << format_double(r.x) << ',' << format_double(r.schmidt_number) << ','
        << format_double(r.coupling) << ',' << format_double(r.delta_thermal) << ','
        << format_double(r.delta_poisson) << '\n';
  }
}

inline void write_convergence_csv(std::ostream& out, const ConvergenceReport& report) {
  out << "grid";
  for (int i = 0; i < 10; ++i) out << ",lambda" << i;
  out << ",K\n";
  for (const auto& row : report.rows) {
    out << row.grid_size;
    for (double l : row.leading) out << ',' << format_double(l);
    out << ',' << format_double(row.schmidt_number) << '\n';
  }
}

inline void write_spectrum_csv(std::ostream& out, const SchmidtSpectrum& s) {
  detail::require_finite(s.eigenvalues);
  out << "n,lambda\n";
  for (std::size_t n = 0; n < s.eigenvalues.size(); ++n) {
    out << n << ',' << format_double(s.eigenvalues[n]) << '\n';
  }
}

}  // namespace pdc
