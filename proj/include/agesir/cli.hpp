#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace agesir {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitConfig = 2, kExitNumerical = 3 };

/// Entry point of the `agesir` tool; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace agesir
