#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sdna::cli {

/// Runs the `sdna` command line. Exit codes: 0 success (for scenario and
/// attack commands: the outcome expected for the flags), 1 failure, 2 usage.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sdna::cli
