#pragma once

// Reading and writing tabulated kernels.
//
// CSV layout:
//   # axis1: lo,hi,n
//   # axis2: lo,hi,n
//   n1 data rows of n2 comma-separated values, each either a plain real or a
//   complex literal "re+imj" / "re-imj".
//
// JSON layout:
//   {"axis1": {"lo":..,"hi":..,"n":..}, "axis2": {...},
//    "values_re": [[...], ...], "values_im": [[...], ...]}
// An axis may also be given as an array of uniformly spaced midpoints.

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>

#include "pdcstats/format.hpp"
#include "pdcstats/sdf.hpp"

namespace pdc {

enum class KernelFormat { Csv, Json };

inline KernelFormat kernel_format_for(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  for (auto& ch : ext) ch = static_cast<char>(std::tolower(ch));
  return ext == ".json" ? KernelFormat::Json : KernelFormat::Csv;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

inline std::optional<double> parse_real(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (s.empty() || ec != std::errc{} || ptr != end) return std::nullopt;
  return value;
}

/// Parses "1.5", "1.5+2j", "-1e-3-4.5e+2j", "2j".
inline std::optional<Complex> parse_complex(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.back() != 'j' && s.back() != 'J') {
    auto re = parse_real(s);
    if (!re) return std::nullopt;
    return Complex(*re, 0.0);
  }
  s.remove_suffix(1);
  // Split at the last sign that is not an exponent sign or the leading sign.
  std::size_t split = std::string_view::npos;
  for (std::size_t i = s.size(); i-- > 1;) {
    if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
      split = i;
      break;
    }
  }
  if (split == std::string_view::npos) {
    auto im = parse_real(s);
    if (!im) return std::nullopt;
    return Complex(0.0, *im);
  }
  auto re = parse_real(s.substr(0, split));
  auto im = parse_real(s.substr(split));
  if (!re || !im) return std::nullopt;
  return Complex(*re, *im);
}

inline UniformAxis parse_axis_header(std::string_view rest, std::size_t line) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto comma = rest.find(',', start);
    parts.push_back(rest.substr(start, comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (parts.size() != 3) {
    throw ParseError("axis header needs lo,hi,n", line);
  }
  auto lo = parse_real(parts[0]);
  auto hi = parse_real(parts[1]);
  auto n = parse_real(parts[2]);
  if (!lo || !hi || !n || *n < 1.0 || std::floor(*n) != *n) {
    throw ParseError("malformed axis header", line);
  }
  UniformAxis axis{*lo, *hi, static_cast<std::size_t>(*n)};
  if (!(axis.hi > axis.lo)) throw ParseError("axis needs lo < hi", line);
  return axis;
}

inline UniformAxis axis_from_json(const nlohmann::json& j,
                                  const std::string& name) {
  if (j.is_object()) {
    UniformAxis axis{j.at("lo").get<double>(), j.at("hi").get<double>(),
                     j.at("n").get<std::size_t>()};
    axis.validate();
    return axis;
  }
  if (!j.is_array() || j.size() < 2) {
    throw ParseError(name + " must be an object {lo,hi,n} or >= 2 points", 0);
  }
  const auto pts = j.get<std::vector<double>>();
  const double h = (pts.back() - pts.front()) / static_cast<double>(pts.size() - 1);
  if (!(h > 0.0)) throw ParseError(name + " must be strictly increasing", 0);
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (std::abs(pts[i] - pts[i - 1] - h) > 1e-9 * std::max(1.0, std::abs(h))) {
      throw ParseError(name + " is not uniformly spaced", 0);
    }
  }
  return {pts.front() - h / 2, pts.back() + h / 2, pts.size()};
}

}  // namespace detail

inline SpectralKernel read_kernel_csv(std::istream& in) {
  std::optional<UniformAxis> axis1, axis2;
  std::vector<std::vector<Complex>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view view = detail::trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      view.remove_prefix(1);
      view = detail::trim(view);
      if (view.starts_with("axis1:")) {
        axis1 = detail::parse_axis_header(view.substr(6), lineno);
      } else if (view.starts_with("axis2:")) {
        axis2 = detail::parse_axis_header(view.substr(6), lineno);
      }
      continue;
    }
    if (!axis1 || !axis2) {
      throw ParseError("data row before both axis headers", lineno);
    }
    std::vector<Complex> row;
    row.reserve(axis2->n);
    std::size_t start = 0;
    std::size_t column = 0;
    while (true) {
      const auto comma = view.find(',', start);
      ++column;
      auto value = detail::parse_complex(view.substr(start, comma - start));
      if (!value) throw ParseError("cannot parse value", lineno, column);
      row.push_back(*value);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (row.size() != axis2->n) {
      throw ParseError("row has " + std::to_string(row.size()) +
                           " values, expected " + std::to_string(axis2->n),
                       lineno);
    }
    rows.push_back(std::move(row));
  }
  if (!axis1 || !axis2) throw ParseError("missing axis headers", lineno);
  if (rows.size() != axis1->n) {
    throw DimensionMismatch("kernel file has " + std::to_string(rows.size()) +
                            " rows, axis1 declares " +
                            std::to_string(axis1->n));
  }
  Eigen::MatrixXcd values(static_cast<Eigen::Index>(axis1->n),
                          static_cast<Eigen::Index>(axis2->n));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j];
    }
  }
  return SpectralKernel(*axis1, *axis2, std::move(values));
}

inline SpectralKernel read_kernel_json(std::istream& in) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), 0);
  }
  try {
    const UniformAxis axis1 = detail::axis_from_json(doc.at("axis1"), "axis1");
    const UniformAxis axis2 = detail::axis_from_json(doc.at("axis2"), "axis2");
    const auto re = doc.at("values_re").get<std::vector<std::vector<double>>>();
    std::vector<std::vector<double>> im;
    if (doc.contains("values_im")) {
      im = doc.at("values_im").get<std::vector<std::vector<double>>>();
    }
    if (re.size() != axis1.n || (!im.empty() && im.size() != axis1.n)) {
      throw DimensionMismatch("values row count does not match axis1");
    }
    Eigen::MatrixXcd values(static_cast<Eigen::Index>(axis1.n),
                            static_cast<Eigen::Index>(axis2.n));
    for (std::size_t i = 0; i < axis1.n; ++i) {
      if (re[i].size() != axis2.n || (!im.empty() && im[i].size() != axis2.n)) {
        throw ParseError("values row has wrong length", i + 1);
      }
      for (std::size_t j = 0; j < axis2.n; ++j) {
        values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            Complex(re[i][j], im.empty() ? 0.0 : im[i][j]);
      }
    }
    return SpectralKernel(axis1, axis2, std::move(values));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed kernel JSON: ") + e.what(), 0);
  }
}

/// Loads a kernel as stored; normalization is left to the caller.
inline SpectralKernel load_kernel(const std::filesystem::path& path,
                                  std::optional<KernelFormat> format = {}) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open kernel file " + path.string());
  const KernelFormat fmt = format.value_or(kernel_format_for(path));
  return fmt == KernelFormat::Json ? read_kernel_json(in) : read_kernel_csv(in);
}

inline void write_kernel_csv(std::ostream& out, const SpectralKernel& k) {
  const auto axis_line = [](const UniformAxis& a) {
    return format_double(a.lo) + "," + format_double(a.hi) + "," +
           std::to_string(a.n);
  };
  out << "# axis1: " << axis_line(k.axis1()) << '\n';
  out << "# axis2: " << axis_line(k.axis2()) << '\n';
  const bool real = k.is_real();
  const auto& v = k.values();
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      if (j != 0) out << ',';
      out << (real ? format_double(v(i, j).real()) : format_complex(v(i, j)));
    }
    out << '\n';
  }
}

inline void write_kernel_json(std::ostream& out, const SpectralKernel& k) {
  const auto axis_json = [](const UniformAxis& a) {
    return nlohmann::json{{"lo", a.lo}, {"hi", a.hi}, {"n", a.n}};
  };
  const auto& v = k.values();
  nlohmann::json re = nlohmann::json::array();
  nlohmann::json im = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    std::vector<double> r(static_cast<std::size_t>(v.cols()));
    std::vector<double> m(r.size());
    for (Eigen::Index j = 0; j < v.cols(); ++j) {
      r[static_cast<std::size_t>(j)] = v(i, j).real();
      m[static_cast<std::size_t>(j)] = v(i, j).imag();
    }
    re.push_back(std::move(r));
    im.push_back(std::move(m));
  }
  nlohmann::json doc{{"axis1", axis_json(k.axis1())},
                     {"axis2", axis_json(k.axis2())},
                     {"values_re", std::move(re)},
                     {"values_im", std::move(im)}};
  out << doc.dump() << '\n';
}

inline void save_kernel(const std::filesystem::path& path,
                        const SpectralKernel& k,
                        std::optional<KernelFormat> format = {}) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write kernel file " + path.string());
  const KernelFormat fmt = format.value_or(kernel_format_for(path));
  if (fmt == KernelFormat::Json) {
    write_kernel_json(out, k);
  } else {
    write_kernel_csv(out, k);
  }
}

}  // namespace pdc
