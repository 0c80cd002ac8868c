#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cpc::cli {

enum ExitCode : int {
  kOk = 0,
  kVerificationFailed = 1,
  kInvalidConfig = 2,
  kInternalBreach = 3,
};

/// Runs one command line. args[0] is the program name, as in argv.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cpc::cli
