#pragma once

#include <iosfwd>

namespace dcs::cli {

/// Parses argv, runs one subcommand and maps failures to exit codes:
/// 0 success, 1 usage or validation error, 2 I/O error.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dcs::cli
