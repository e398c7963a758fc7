#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace emips::cli {

// Exit codes for `run`; other subcommands use Ok/Usage only.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,  // bad arguments, unreadable files, assembler errors
  kFault = 2,
  kCycleLimit = 3,
};

// `args` excludes the program name. Machine-readable output goes to `out`,
// diagnostics and traces to `err`.
int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace emips::cli
