#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace lazycore {

// Exit codes shared by every subcommand. Program-level failures (a source
// file that does not parse or run, an empty corpus, a summary directory with
// missing tables) exit 1; environment failures (unreadable input, unwritable
// output) exit 2.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitIo = 2;

// Runs the command line driver. `args` holds the arguments after the program
// name. Normal output goes to `out`, diagnostics to `err`. Returns the
// process exit code.
int cli_main(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err);

}  // namespace lazycore
