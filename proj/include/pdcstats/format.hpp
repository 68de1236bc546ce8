#pragma once

#include <complex>
#include <cstdio>
#include <string>

namespace pdc {

/// Round-trip decimal form: 17 significant digits, locale independent.
inline std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

/// "re+imj" / "re-imj"
inline std::string format_complex(std::complex<double> value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g%+.17gj", value.real(), value.imag());
  return buf;
}

}  // namespace pdc
