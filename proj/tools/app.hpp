#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace catseries::app {

/// Runs the command line `args` (program name excluded). Data goes to `out`,
/// diagnostics to `err`. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace catseries::app
