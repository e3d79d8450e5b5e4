#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace semtts::cli {

enum ExitCode : int { ok = 0, row_failures = 1, usage = 2 };

/// Runs the `semtts` command line. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace semtts::cli
