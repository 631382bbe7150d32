#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gscan::cli {

// Exit codes: 0 success, 1 configuration error, 2 runtime failure.
// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace gscan::cli
