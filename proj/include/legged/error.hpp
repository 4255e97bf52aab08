#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace legged {

enum class ErrorCode {
  AngleAtPi,
  DimensionMismatch,
  IndexOutOfRange,
  NegativeSigma,
  NonPositiveInterval,
  BrokenContact,
  EmptyStream,
  NonMonotoneTime,
  MissingContactState,
  SingularCovariance,
  NotAnchored,
  LinearSolveFailure,
  InfeasibleChain,
  TimestampMismatch,
  EmptyInput,
  ParseError,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Exception carrying a machine-checkable error code.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Parse failure with the 1-based line number of the offending input line (0 if not line-bound).
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::AngleAtPi: return "AngleAtPi";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NegativeSigma: return "NegativeSigma";
    case ErrorCode::NonPositiveInterval: return "NonPositiveInterval";
    case ErrorCode::BrokenContact: return "BrokenContact";
    case ErrorCode::EmptyStream: return "EmptyStream";
    case ErrorCode::NonMonotoneTime: return "NonMonotoneTime";
    case ErrorCode::MissingContactState: return "MissingContactState";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::NotAnchored: return "NotAnchored";
    case ErrorCode::LinearSolveFailure: return "LinearSolveFailure";
    case ErrorCode::InfeasibleChain: return "InfeasibleChain";
    case ErrorCode::TimestampMismatch: return "TimestampMismatch";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace legged
