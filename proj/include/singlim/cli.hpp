#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace singlim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumericFailure = 1;
inline constexpr int kExitInvalidConfig = 2;

/// Runs one command; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace singlim::cli
