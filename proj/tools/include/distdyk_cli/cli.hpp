#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace distdyk::cli {

/// Exit codes of the command-line front end.
enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kInvariantViolation = 2,
  kIo = 3,
};

/// Runs one command (gen | run | verify | rates). `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace distdyk::cli
