#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace catseries {

/// Failure categories raised by the library. Each maps to a distinct
/// precondition or numerical failure so callers can branch on it.
enum class ErrorCode {
  InvalidArgument,
  UnknownLabel,
  MalformedRow,
  TooShort,
  MissingValuePresent,
  AllMissing,
  InsufficientTransitions,
  UndefinedTransitionRow,
  UnvisitedState,
  DegenerateDistribution,
  NoUsableRows,
  Separation,
  SingularHessian,
  NonmonotoneCutpoints,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace catseries
