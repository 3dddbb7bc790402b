#pragma once

#include <iosfwd>

namespace kpnf {

/// Parses the command line, runs the experiment and returns the process exit
/// code: 0 success, 1 failed scientific check, 2 configuration error,
/// 3 runtime failure. Results go to the configured output path ("-" means
/// `out`); messages go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kpnf
