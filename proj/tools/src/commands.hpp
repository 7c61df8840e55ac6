#pragma once

#include <iosfwd>

namespace tailcluster::cli {

/// Parses argv, runs one subcommand and returns the process exit code:
/// 0 success, 2 configuration error, 3 numerical failure or contract violation.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace tailcluster::cli
