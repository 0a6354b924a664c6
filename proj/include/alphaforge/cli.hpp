#pragma once

#include <iosfwd>

namespace alphaforge {

/// Process exit codes of the command-line tool.
namespace exit_code {
inline constexpr int kOk = 0;
inline constexpr int kError = 1;         // any other failure
inline constexpr int kUsage = 2;         // bad flag, subcommand or configuration value
inline constexpr int kMissingFile = 3;   // an input file does not exist or cannot be read
inline constexpr int kNoViableAlpha = 4; // a search ended with only sentinel candidates
}  // namespace exit_code

/// Runs one invocation of the tool. Results go to `out`, diagnostics to `err`.
int run_command(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace alphaforge
