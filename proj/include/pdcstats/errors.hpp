#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace pdc {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad files, bad arguments, inconsistent series.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A numerical precondition failed or a computation could not be carried out.
class NumericError : public Error {
 public:
  using Error::Error;
};

class ParseError : public InputError {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t column = 0)
      : InputError(format(what, row, column)), row_(row), column_(column) {}

  /// 1-based line number in the source; 0 when not tied to a line.
  std::size_t row() const noexcept { return row_; }
  /// 1-based field index within the row; 0 when the whole row is at fault.
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t row,
                            std::size_t column) {
    std::string loc;
    if (row != 0) {
      loc = "row " + std::to_string(row);
      if (column != 0) loc += ", column " + std::to_string(column);
      loc += ": ";
    }
    return loc + what;
  }

  std::size_t row_;
  std::size_t column_;
};

class DimensionMismatch : public InputError {
 public:
  using InputError::InputError;
};

class DegenerateSeries : public InputError {
 public:
  using InputError::InputError;
};

class InvalidParameter : public InputError {
 public:
  using InputError::InputError;
};

class ZeroKernel : public NumericError {
 public:
  using NumericError::NumericError;
};

class NotNormalized : public NumericError {
 public:
  using NumericError::NumericError;
};

class GammaOutOfRange : public NumericError {
 public:
  using NumericError::NumericError;
};

class EfficiencyOutOfRange : public InputError {
 public:
  using InputError::InputError;
};

enum class WarningCode {
  DomainTruncation,
  IllConditioned,
  NotConverged,
};

inline const char* to_string(WarningCode code) {
  switch (code) {
    case WarningCode::DomainTruncation:
      return "DomainTruncation";
    case WarningCode::IllConditioned:
      return "IllConditioned";
    case WarningCode::NotConverged:
      return "NotConverged";
  }
  return "Unknown";
}

struct Warning {
  WarningCode code;
  std::string message;
};

/// Optional sink for non-fatal diagnostics. Functions take a nullable pointer.
using Warnings = std::vector<Warning>;

inline void warn(Warnings* sink, WarningCode code, std::string message) {
  if (sink != nullptr) sink->push_back({code, std::move(message)});
}

}  // namespace pdc
