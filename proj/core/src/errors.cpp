#include "mrsabr/errors.hpp"

namespace mrsabr {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonPositiveResult: return "NonPositiveResult";
    case ErrorCode::OverflowDomain: return "OverflowDomain";
    case ErrorCode::DegenerateTheta: return "DegenerateTheta";
    case ErrorCode::NegativeCbar: return "NegativeCbar";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::InsufficientQuotes: return "InsufficientQuotes";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::InsufficientPanel: return "InsufficientPanel";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace mrsabr
