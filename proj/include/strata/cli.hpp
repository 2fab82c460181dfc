#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace strata {

// Exit codes of the command-line interface.
enum ExitCode : int {
  kExitOk = 0,
  kExitInput = 1,       // I/O, syntax or usage error
  kExitRejected = 2,    // range restriction or stratification violations
  kExitNoModels = 3,    // no models / UNSAT
  kExitLimit = 4,       // limit reached, result partial or undecided
};

// Runs one CLI invocation; `args` excludes the program name.
int runCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace strata
