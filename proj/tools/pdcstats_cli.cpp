// pdcstats: Schmidt decomposition and photon-number statistics of
// parametric downconversion sources.
//
//   pdcstats decompose   --gaussian VX VY THETA | --kernel FILE
//   pdcstats pnd         ... --coupling C | --mean N [--joint] [--loss ETA]
//   pdcstats sweep       --gaussian VX VY THETA --theta-range A B N | --sigma-range A B N
//   pdcstats fit         ... --series FILE
//   pdcstats loss-invert --measured FILE --eta ETA
//
// Exit codes: 0 success, 2 usage or input error, 3 numerical failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pdcstats/pdcstats.hpp"

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumeric = 3;

/// Usage errors detected after CLI11 parsing.
struct UsageError : pdc::InputError {
  using pdc::InputError::InputError;
};

/// Accepts plain numbers and multiples of pi: "0.785", "pi/4", "3pi/8", "0.5*pi".
double parse_angle(std::string text) {
  std::string s;
  for (std::size_t i = 0; i < text.size(); ++i) {
    // UTF-8 encoding of the Greek letter pi.
    if (i + 1 < text.size() && static_cast<unsigned char>(text[i]) == 0xCF &&
        static_cast<unsigned char>(text[i + 1]) == 0x80) {
      s += "pi";
      ++i;
    } else if (!std::isspace(static_cast<unsigned char>(text[i]))) {
      s += static_cast<char>(std::tolower(static_cast<unsigned char>(text[i])));
    }
  }
  const auto pos = s.find("pi");
  if (pos == std::string::npos) {
    if (auto v = pdc::detail::parse_real(s)) return *v;
    throw UsageError("cannot parse angle '" + text + "'");
  }
  std::string head = s.substr(0, pos);
  std::string tail = s.substr(pos + 2);
  if (!head.empty() && head.back() == '*') head.pop_back();
  double factor = 1.0;
  if (head == "-") {
    factor = -1.0;
  } else if (!head.empty()) {
    auto v = pdc::detail::parse_real(head);
    if (!v) throw UsageError("cannot parse angle '" + text + "'");
    factor = *v;
  }
  double divisor = 1.0;
  if (!tail.empty()) {
    auto v = tail.front() == '/' ? pdc::detail::parse_real(tail.substr(1)) : std::nullopt;
    if (!v || *v == 0.0) throw UsageError("cannot parse angle '" + text + "'");
    divisor = *v;
  }
  return factor * std::numbers::pi / divisor;
}

double parse_number(const std::string& text, const std::string& what) {
  if (auto v = pdc::detail::parse_real(text)) return *v;
  throw UsageError("cannot parse " + what + " '" + text + "'");
}

struct SourceOptions {
  std::vector<std::string> gaussian;
  std::string kernel;
  std::string kernel_format;
  bool no_normalize = false;
  std::string theta;
  std::size_t grid = 1500;
  double extent = 7.0;
  std::string method = "svd";
  double eps_lambda = pdc::kDefaultEpsLambda;
  double tail = 1e-10;
  std::string out;
  std::string format;
};

void add_source_options(CLI::App* cmd, SourceOptions& o, bool allow_kernel = true) {
  cmd->add_option("--gaussian", o.gaussian, "Gaussian SDF: sigma_x^2 sigma_y^2 theta")
      ->expected(3)
      ->type_name("VX VY THETA");
  if (allow_kernel) {
    cmd->add_option("--kernel", o.kernel, "tabulated kernel file (CSV or JSON)");
    cmd->add_option("--kernel-format", o.kernel_format, "csv|json (default: by extension)")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_flag("--no-normalize", o.no_normalize,
                  "use the kernel as stored (must already have unit norm)");
  }
  cmd->add_option("--theta", o.theta, "override the Gaussian angle (accepts pi/4 etc.)");
  cmd->add_option("--grid", o.grid, "grid points per axis for the SVD route")
      ->capture_default_str()
      ->check(CLI::Range(std::size_t{2}, std::size_t{20000}));
  cmd->add_option("--extent", o.extent, "sampling half-width in units of max(sigma)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--method", o.method, "decomposition route for Gaussians")
      ->capture_default_str()
      ->check(CLI::IsMember({"svd", "mehler"}));
  cmd->add_option("--eps-lambda", o.eps_lambda, "discarded Schmidt weight")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--tail", o.tail, "photon-number tail mass target")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", o.out, "output path (default: stdout)");
  cmd->add_option("--format", o.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
}

bool has_gaussian(const SourceOptions& o) { return !o.gaussian.empty(); }

pdc::GaussianParams gaussian_params(const SourceOptions& o) {
  if (o.gaussian.size() != 3) throw UsageError("--gaussian needs three values");
  double theta = parse_angle(o.gaussian[2]);
  if (!o.theta.empty()) theta = parse_angle(o.theta);
  auto p = pdc::GaussianParams::from_variances(parse_number(o.gaussian[0], "variance"),
                                               parse_number(o.gaussian[1], "variance"), theta);
  p.validate();
  return p;
}

void report_warnings(const pdc::Warnings& warnings) {
  for (const auto& w : warnings) {
    std::cerr << "warning: " << pdc::to_string(w.code) << ": " << w.message << '\n';
  }
}

nlohmann::json source_config(const SourceOptions& o) {
  nlohmann::json c;
  if (has_gaussian(o)) {
    const auto p = gaussian_params(o);
    c["gaussian"] = {{"sigma_x2", p.sigma_x * p.sigma_x},
                     {"sigma_y2", p.sigma_y * p.sigma_y},
                     {"theta", p.theta}};
    c["method"] = o.method;
  } else {
    c["kernel"] = o.kernel;
    c["normalize"] = !o.no_normalize;
    c["method"] = "svd";
  }
  c["grid"] = o.grid;
  c["extent"] = o.extent;
  c["eps_lambda"] = o.eps_lambda;
  c["tail"] = o.tail;
  return c;
}

pdc::SchmidtSpectrum load_spectrum(const SourceOptions& o) {
  if (has_gaussian(o) == !o.kernel.empty()) {
    throw UsageError("give exactly one of --gaussian or --kernel");
  }
  pdc::Warnings warnings;
  pdc::SchmidtSpectrum s;
  if (has_gaussian(o)) {
    const auto method =
        o.method == "mehler" ? pdc::DecompositionMethod::Mehler : pdc::DecompositionMethod::Svd;
    s = pdc::decompose_gaussian(gaussian_params(o), method, o.grid, o.eps_lambda, o.extent,
                                &warnings);
  } else {
    if (o.method == "mehler") throw UsageError("--method mehler needs --gaussian");
    std::optional<pdc::KernelFormat> fmt;
    if (o.kernel_format == "csv") fmt = pdc::KernelFormat::Csv;
    if (o.kernel_format == "json") fmt = pdc::KernelFormat::Json;
    auto kernel = pdc::load_kernel(o.kernel, fmt);
    if (!o.no_normalize) kernel = pdc::normalize(kernel);
    s = pdc::decompose_svd(kernel, {o.eps_lambda, false});
  }
  report_warnings(warnings);
  s.validate();
  return s;
}

/// Writes to --out or stdout.
template <typename Writer>
void emit(const SourceOptions& o, Writer&& write) {
  std::ostringstream buf;
  write(buf);
  if (o.out.empty()) {
    std::cout << buf.str();
  } else {
    std::ofstream file(o.out);
    if (!file) throw pdc::InputError("cannot write " + o.out);
    file << buf.str();
  }
}

void write_csv_config(std::ostream& out, const nlohmann::json& config) {
  for (const auto& [key, value] : config.items()) {
    out << "# " << key << ": " << value.dump() << '\n';
  }
}

int cmd_decompose(const SourceOptions& o, const std::vector<std::size_t>& convergence) {
  if (!convergence.empty()) {
    if (!has_gaussian(o)) throw UsageError("--convergence needs --gaussian");
    const auto report = pdc::convergence_study(gaussian_params(o), convergence, o.eps_lambda,
                                               1e-6, o.extent);
    emit(o, [&](std::ostream& out) {
      write_csv_config(out, source_config(o));
      out << "# converged: " << (report.converged ? "true" : "false") << '\n';
      pdc::write_convergence_csv(out, report);
    });
    return 0;
  }
  const auto s = load_spectrum(o);
  emit(o, [&](std::ostream& out) {
    if (o.format == "csv") {
      write_csv_config(out, source_config(o));
      out << "# K: " << pdc::format_double(pdc::schmidt_number(s)) << '\n';
      pdc::write_spectrum_csv(out, s);
    } else {
      auto j = pdc::to_json(s);
      j["config"] = source_config(o);
      out << j.dump() << '\n';
    }
  });
  if (!o.out.empty()) std::cout << "K = " << pdc::format_double(pdc::schmidt_number(s)) << '\n';
  return 0;
}

struct PndOptions {
  std::optional<double> coupling;
  std::optional<double> mean;
  bool joint = false;
  std::optional<double> loss;
  std::optional<std::size_t> n_max;
};

int cmd_pnd(const SourceOptions& o, const PndOptions& p) {
  if (p.coupling.has_value() == p.mean.has_value()) {
    throw UsageError("give exactly one of --coupling or --mean");
  }
  if (p.joint && p.loss) throw UsageError("--joint and --loss cannot be combined");
  const auto s = load_spectrum(o);
  const double coupling = p.coupling ? *p.coupling : pdc::solve_coupling(s, *p.mean);
  const auto bank = pdc::bank_from_spectrum(s, coupling);
  const auto trunc = p.n_max ? pdc::Truncation::fixed(*p.n_max) : pdc::Truncation::adaptive(o.tail);
  auto pnd = pdc::convolve_gf(bank, trunc);
  if (p.loss) pnd = pdc::apply_loss(pnd, *p.loss);
  if (p.joint) pnd = pdc::joint_pnd(pnd);
  pnd.validate();

  auto config = source_config(o);
  config["coupling"] = coupling;
  config["K"] = pdc::schmidt_number(s);
  if (p.loss) config["loss"] = *p.loss;
  if (p.joint) config["joint"] = true;
  if (p.n_max) config["nmax"] = *p.n_max;
  emit(o, [&](std::ostream& out) {
    if (o.format == "json") {
      auto j = pdc::to_json(pnd);
      j["config"] = config;
      out << j.dump() << '\n';
    } else {
      write_csv_config(out, config);
      pdc::write_pnd_csv(out, pnd);
    }
  });
  return 0;
}

struct SweepCli {
  std::vector<std::string> theta_range;
  std::vector<std::string> sigma_range;
  bool log = false;
  double mean = 1.0;
};

std::size_t parse_count(const std::string& text) {
  const double v = parse_number(text, "count");
  if (v < 0.0 || std::floor(v) != v) throw UsageError("range count must be a non-negative integer");
  return static_cast<std::size_t>(v);
}

int cmd_sweep(const SourceOptions& o, const SweepCli& c) {
  if (!has_gaussian(o)) throw UsageError("sweep needs a --gaussian template");
  if (c.theta_range.empty() == c.sigma_range.empty()) {
    throw UsageError("give exactly one of --theta-range or --sigma-range");
  }
  const auto templ = gaussian_params(o);
  pdc::SweepVariable variable;
  std::vector<double> values;
  if (!c.theta_range.empty()) {
    variable = pdc::SweepVariable::Theta;
    const std::size_t count = parse_count(c.theta_range[2]);
    if (count == 0) throw UsageError("sweep range is empty");
    values = pdc::linear_range(parse_angle(c.theta_range[0]), parse_angle(c.theta_range[1]), count);
  } else {
    variable = pdc::SweepVariable::VarianceX;
    const std::size_t count = parse_count(c.sigma_range[2]);
    if (count == 0) throw UsageError("sweep range is empty");
    const double lo = parse_number(c.sigma_range[0], "variance");
    const double hi = parse_number(c.sigma_range[1], "variance");
    values = c.log ? pdc::log_range(lo, hi, count) : pdc::linear_range(lo, hi, count);
  }
  pdc::SweepOptions opts;
  opts.method = o.method == "mehler" ? pdc::DecompositionMethod::Mehler : pdc::DecompositionMethod::Svd;
  opts.grid_size = o.grid;
  opts.eps_lambda = o.eps_lambda;
  opts.extent_sigmas = o.extent;
  opts.mean = c.mean;
  opts.tail = o.tail;
  pdc::Warnings warnings;
  const auto rows = pdc::distance_sweep(templ, variable, values, opts, &warnings);
  report_warnings(warnings);

  auto config = source_config(o);
  config["mean"] = c.mean;
  emit(o, [&](std::ostream& out) {
    if (o.format == "json") {
      nlohmann::json arr = nlohmann::json::array();
      for (const auto& r : rows) {
        arr.push_back({{"x", r.x}, {"K", r.schmidt_number}, {"coupling", r.coupling},
                       {"delta_thermal", r.delta_thermal}, {"delta_poisson", r.delta_poisson}});
      }
      out << nlohmann::json{{"rows", arr}, {"config", config}}.dump() << '\n';
    } else {
      write_csv_config(out, config);
      pdc::write_sweep_csv(out, rows, variable);
    }
  });
  return 0;
}

int cmd_fit(const SourceOptions& o, const std::string& series_path) {
  const auto series = pdc::load_series(series_path);
  const auto s = load_spectrum(o);
  const auto fit = pdc::fit_sqrt_law(series, s);
  emit(o, [&](std::ostream& out) {
    auto j = pdc::to_json(fit);
    auto config = source_config(o);
    config["series"] = series_path;
    j["config"] = config;
    out << j.dump() << '\n';
  });
  return 0;
}

int cmd_loss_invert(const SourceOptions& o, const std::string& measured_path, double eta,
                    std::optional<std::size_t> n_max) {
  const auto measured = pdc::load_pnd(measured_path);
  const auto inv = pdc::invert_loss(measured, eta, n_max.value_or(measured.n_max()));
  report_warnings(inv.warnings);
  emit(o, [&](std::ostream& out) {
    if (o.format == "csv") {
      out << "# residual: " << pdc::format_double(inv.residual) << '\n';
      out << "# condition_number: " << pdc::format_double(inv.condition_number) << '\n';
      pdc::write_pnd_csv(out, inv.pnd);
    } else {
      auto j = pdc::to_json(inv);
      j["config"] = {{"measured", measured_path}, {"eta", eta}};
      out << j.dump() << '\n';
    }
  });
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Schmidt decomposition and photon statistics of parametric downconversion"};
  app.require_subcommand(1);

  SourceOptions decompose_opts;
  std::vector<std::size_t> convergence;
  auto* decompose = app.add_subcommand("decompose", "Schmidt spectrum and Schmidt number");
  add_source_options(decompose, decompose_opts);
  decompose->add_option("--convergence", convergence,
                        "grid sizes for a convergence study (CSV report)");

  SourceOptions pnd_opts;
  PndOptions pnd_extra;
  auto* pnd = app.add_subcommand("pnd", "photon-number distribution");
  add_source_options(pnd, pnd_opts);
  pnd->add_option("--coupling", pnd_extra.coupling, "coupling constant C")
      ->check(CLI::NonNegativeNumber);
  pnd->add_option("--mean", pnd_extra.mean, "target mean photon number")
      ->check(CLI::NonNegativeNumber);
  pnd->add_flag("--joint", pnd_extra.joint, "emit the joint signal+idler distribution");
  pnd->add_option("--loss", pnd_extra.loss, "detection efficiency eta");
  pnd->add_option("--nmax", pnd_extra.n_max, "fixed photon-number cutoff");

  SourceOptions sweep_opts;
  SweepCli sweep_extra;
  auto* sweep = app.add_subcommand("sweep", "distance to thermal/Poisson along a family");
  add_source_options(sweep, sweep_opts, false);
  sweep->add_option("--theta-range", sweep_extra.theta_range, "start stop count")->expected(3);
  sweep->add_option("--sigma-range", sweep_extra.sigma_range, "sigma_x^2 start stop count")
      ->expected(3);
  sweep->add_flag("--log", sweep_extra.log, "logarithmic spacing for --sigma-range");
  sweep->add_option("--mean", sweep_extra.mean, "common mean photon number")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);

  SourceOptions fit_opts;
  std::string series_path;
  auto* fit = app.add_subcommand("fit", "coupling constants and square-root law");
  add_source_options(fit, fit_opts);
  fit->add_option("--series", series_path, "CSV of pump_power, mean_n")->required();

  SourceOptions loss_opts;
  std::string measured_path;
  double eta = 1.0;
  std::optional<std::size_t> loss_nmax;
  auto* loss = app.add_subcommand("loss-invert", "undo binomial loss by NNLS");
  loss->add_option("--measured", measured_path, "CSV of n, p(n)")->required();
  loss->add_option("--eta", eta, "detection efficiency")->required();
  loss->add_option("--nmax", loss_nmax, "cutoff of the reconstructed distribution");
  loss->add_option("--out", loss_opts.out, "output path (default: stdout)");
  loss->add_option("--format", loss_opts.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*decompose) return cmd_decompose(decompose_opts, convergence);
    if (*pnd) return cmd_pnd(pnd_opts, pnd_extra);
    if (*sweep) return cmd_sweep(sweep_opts, sweep_extra);
    if (*fit) return cmd_fit(fit_opts, series_path);
    if (*loss) return cmd_loss_invert(loss_opts, measured_path, eta, loss_nmax);
  } catch (const pdc::InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
  return kExitUsage;
}
