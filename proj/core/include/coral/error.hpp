#pragma once

#include <stdexcept>
#include <string>

namespace coral {

enum class ErrorCode {
  InvalidParameter,
  InvalidTransform,
  InvalidInput,
  DegenerateNeighborhood,
  NumericalDegeneracy,
  InsufficientData,
  DegenerateTraining,
  UndefinedRatio,
  ParseError,
  FormatError,
  IoError,
};

/// All library errors carry a code so callers (the CLI in particular) can
/// map failure classes to exit codes without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

/// Unusable input data or files.
inline bool is_data_error(ErrorCode c) noexcept {
  switch (c) {
    case ErrorCode::ParseError:
    case ErrorCode::FormatError:
    case ErrorCode::IoError:
    case ErrorCode::InvalidParameter:
    case ErrorCode::InvalidTransform:
    case ErrorCode::InvalidInput:
      return true;
    default:
      return false;
  }
}

/// Numerical degeneracy or not enough usable data to produce a result.
inline bool is_numeric_error(ErrorCode c) noexcept {
  switch (c) {
    case ErrorCode::DegenerateNeighborhood:
    case ErrorCode::NumericalDegeneracy:
    case ErrorCode::InsufficientData:
    case ErrorCode::DegenerateTraining:
    case ErrorCode::UndefinedRatio:
      return true;
    default:
      return false;
  }
}

}  // namespace coral
