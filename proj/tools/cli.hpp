#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace zeno::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumerical = 1;
inline constexpr int kExitUsage = 2;

// Runs one subcommand. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Reads `key = value` lines ('#' starts a comment) and returns the
// corresponding flags for every key not already present in `args`.
std::vector<std::string> merge_config(const std::vector<std::string>& args);

}  // namespace zeno::cli
