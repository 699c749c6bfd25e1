#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace signstitch::cli {

enum ExitCode : int { kOk = 0, kDataError = 1, kUsageError = 2 };

/// Runs one `signstitch` invocation. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace signstitch::cli
