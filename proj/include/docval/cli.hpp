#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace docval {

// Exit codes: 0 success, 1 input or I/O failure, 2 usage error.
inline constexpr int kExitOk    = 0;
inline constexpr int kExitInput = 1;
inline constexpr int kExitUsage = 2;

// args excludes the program name. "-" as a path means stdin or stdout.
int run_cli(const std::vector<std::string> & args, std::ostream & out, std::ostream & err);
int run_cli(int argc, const char * const * argv, std::ostream & out, std::ostream & err);

}  // namespace docval
