#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fdcp::cli {

/// Entry point shared by main() and the tests: returns the process exit code
/// (0 accept, 1 reject / change found, 2 error).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fdcp::cli
