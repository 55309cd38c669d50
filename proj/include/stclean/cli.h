#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stclean::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// Data goes to `out`, summaries and diagnostics to `err`. args excludes the
// program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace stclean::cli
