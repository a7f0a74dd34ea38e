#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sdom::cli {

enum ExitCode : int { kSuccess = 0, kUsage = 1, kNotDominant = 2, kIo = 3 };

/// Runs the `sd` command line. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace sdom::cli
