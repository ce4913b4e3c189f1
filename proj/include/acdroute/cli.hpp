#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace acdroute::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Runs the `acdroute` command line (`args[0]` is the program name).
/// Subcommands: compute, aggregate, simulate, report.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace acdroute::cli
