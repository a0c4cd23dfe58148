#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace acomp::cli {

// Runs one command line (without the program name). Returns the process exit
// code: 0 on success, 1 on runtime failures, 2 on usage or config errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace acomp::cli
