#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gridgame::cli {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kInvalidInput = 2,
  kInfeasible = 3,
  kTooLarge = 4,
};

/// Runs one command line (without the program name). Data goes to `out`
/// unless --out names a file; notes and errors go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gridgame::cli
