#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace irpdfl::cli {

// Runs one command line (args excludes the program name). Returns the exit
// code: 0 success, 1 runtime failure, 2 usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace irpdfl::cli
