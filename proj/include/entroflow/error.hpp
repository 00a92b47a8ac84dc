#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace entroflow {

enum class ErrorCode {
  NotHermitian,
  ConvergenceFailure,
  DimensionMismatch,
  NonpositiveBeta,
  InvalidState,
  SupportViolation,
  InvalidSpec,
  TooFewFactors,
  NotDegenerate,
  OverlappingPlanes,
  NotUnitary,
  NoConvergence,
  BadCycle,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonpositiveBeta: return "NonpositiveBeta";
    case ErrorCode::InvalidState: return "InvalidState";
    case ErrorCode::SupportViolation: return "SupportViolation";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::TooFewFactors: return "TooFewFactors";
    case ErrorCode::NotDegenerate: return "NotDegenerate";
    case ErrorCode::OverlappingPlanes: return "OverlappingPlanes";
    case ErrorCode::NotUnitary: return "NotUnitary";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::BadCycle: return "BadCycle";
  }
  return "Unknown";
}

/// Library-wide exception. Every precondition failure raised by entroflow
/// carries one of the codes above so callers (the CLI in particular) can
/// map failures onto stable exit statuses.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace entroflow
