#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace opdil {

enum class ErrorCode {
  NotSquare,
  NotHermitian,
  NotPsd,
  ShapeMismatch,
  InvalidArgument,
  InsufficientData,
  CriterionFailed,
  RecursionBreakdown,
  NotScalar,
  IndefiniteHankel,
  DiskViolation,
  TailBoundUnavailable,
  Overflow,
  NotCommuting,
  NotInvertible,
  NotContraction,
  CrossCheckFailed,
  CoreIdentityFailed,
  OrderViolation,
  ParseError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotSquare: return "NotSquare";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::NotPsd: return "NotPsd";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::CriterionFailed: return "CriterionFailed";
    case ErrorCode::RecursionBreakdown: return "RecursionBreakdown";
    case ErrorCode::NotScalar: return "NotScalar";
    case ErrorCode::IndefiniteHankel: return "IndefiniteHankel";
    case ErrorCode::DiskViolation: return "DiskViolation";
    case ErrorCode::TailBoundUnavailable: return "TailBoundUnavailable";
    case ErrorCode::Overflow: return "Overflow";
    case ErrorCode::NotCommuting: return "NotCommuting";
    case ErrorCode::NotInvertible: return "NotInvertible";
    case ErrorCode::NotContraction: return "NotContraction";
    case ErrorCode::CrossCheckFailed: return "CrossCheckFailed";
    case ErrorCode::CoreIdentityFailed: return "CoreIdentityFailed";
    case ErrorCode::OrderViolation: return "OrderViolation";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

/// Every failure raised by the library. `level()` is set by the recursive
/// constructors and names the block level at which the recursion stopped.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message, std::optional<std::size_t> level = std::nullopt)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), level_(level) {}

  ErrorCode code() const noexcept { return code_; }
  std::optional<std::size_t> level() const noexcept { return level_; }

 private:
  ErrorCode code_;
  std::optional<std::size_t> level_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message,
                              std::optional<std::size_t> level = std::nullopt) {
  throw Error(code, message, level);
}

}  // namespace opdil
