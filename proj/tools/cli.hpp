#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace equiflow::cli {

enum ExitCode : int {
  kSuccess = 0,
  kFailure = 1,  ///< validation violations or non-optimal solve
  kUsage = 2,    ///< bad flags, malformed input files, invalid config
  kInternal = 3,
};

/// Runs one command line (without the program name). Output and diagnostics
/// go to the given streams; nothing calls std::exit.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace equiflow::cli
