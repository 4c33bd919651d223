#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace msdsp {

enum class ErrorCode {
  LengthMismatch,
  NonFiniteValue,
  NonPositiveShape,
  NonPositiveB,
  InvalidParameter,
  SingularInnovation,
  DegenerateTransition,
  IncompatibleFamily,
  NonConvergentCholesky,
  HorizonMismatch,
  WrongFamily,
  QOutOfRange,
  Empty,
  TooShort,
  DegenerateLosses,
  MissingSeries,
  InsufficientHistory,
  ZeroVariance,
  InfeasibleLayout,
  InsufficientSynthesisHistory,
  ParseError,
  IoError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::NonPositiveShape: return "NonPositiveShape";
    case ErrorCode::NonPositiveB: return "NonPositiveB";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::SingularInnovation: return "SingularInnovation";
    case ErrorCode::DegenerateTransition: return "DegenerateTransition";
    case ErrorCode::IncompatibleFamily: return "IncompatibleFamily";
    case ErrorCode::NonConvergentCholesky: return "NonConvergentCholesky";
    case ErrorCode::HorizonMismatch: return "HorizonMismatch";
    case ErrorCode::WrongFamily: return "WrongFamily";
    case ErrorCode::QOutOfRange: return "QOutOfRange";
    case ErrorCode::Empty: return "Empty";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::DegenerateLosses: return "DegenerateLosses";
    case ErrorCode::MissingSeries: return "MissingSeries";
    case ErrorCode::InsufficientHistory: return "InsufficientHistory";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::InfeasibleLayout: return "InfeasibleLayout";
    case ErrorCode::InsufficientSynthesisHistory: return "InsufficientSynthesisHistory";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

/// Library exception. `code()` is stable and machine readable; `what()` carries
/// the human readable detail (location, offending value, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& detail) {
  if (!condition) throw Error(code, detail);
}

}  // namespace msdsp
