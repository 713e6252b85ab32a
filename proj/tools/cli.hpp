#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace relupgd::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitConfigError = 2,
  kExitDiverged = 3,
};

/// Runs the relupgd command line (args[0] is the program name). Results go to `out`,
/// diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace relupgd::cli
