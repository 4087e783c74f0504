#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace hermix {

enum class ErrorCode {
  SingularMatrix,
  DimensionMismatch,
  OrderTooLarge,
  NonFiniteDensity,
  DegenerateComponent,
  EmptySample,
  OverlappingIntervals,
  NoValidPartition,
  InsufficientSamples,
  PrecisionExhausted,
  InvalidBalance,
  InvalidArgument,
  SchemaViolation,
  Io,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::SingularMatrix: return "SingularMatrix";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::OrderTooLarge: return "OrderTooLarge";
    case ErrorCode::NonFiniteDensity: return "NonFiniteDensity";
    case ErrorCode::DegenerateComponent: return "DegenerateComponent";
    case ErrorCode::EmptySample: return "EmptySample";
    case ErrorCode::OverlappingIntervals: return "OverlappingIntervals";
    case ErrorCode::NoValidPartition: return "NoValidPartition";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::PrecisionExhausted: return "PrecisionExhausted";
    case ErrorCode::InvalidBalance: return "InvalidBalance";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace hermix
