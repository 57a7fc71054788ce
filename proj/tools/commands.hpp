#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace crosc::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kNumerical = 3,
  kPartialFailure = 4,
};

/// Parses and runs one command line. args[0] is the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace crosc::cli
