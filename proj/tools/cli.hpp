#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace aps::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;

/// Runs the aps_lab command line. args excludes the program name.
/// Machine-readable output goes to out (or files), diagnostics to err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace aps::cli
