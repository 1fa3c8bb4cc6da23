#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mrsabr {

enum class ErrorCode {
  InvalidArgument,
  NonPositiveResult,
  OverflowDomain,
  DegenerateTheta,
  NegativeCbar,
  QuadratureFailure,
  InsufficientQuotes,
  NonConvergence,
  ParseError,
  EmptyFile,
  InsufficientPanel,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mrsabr
