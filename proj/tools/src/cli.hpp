#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mrsabr::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,          ///< usage errors and other library errors
  kValidationFailed = 2, ///< verify tolerance breach
  kParseError = 3,       ///< malformed or empty input files
  kNonConvergence = 4,
};

/// Runs the command line `args` (without the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace mrsabr::cli
