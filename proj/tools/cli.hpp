#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace blockdisc::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kData = 2,
  kHazard = 3,
};

/// Runs one invocation. `args` excludes the program name. Paths equal to "-"
/// refer to `in` / `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace blockdisc::cli
