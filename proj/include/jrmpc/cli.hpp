#pragma once

#include <iosfwd>

namespace jrmpc {

/// Exit codes of the command-line driver.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitNumerical = 2 };

/// Entry point of the `jrmpc` tool. Subcommands: register-batch,
/// register-incremental, synth, eval, classify, export-model, baseline-icp.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int cli_main(int argc, const char* const* argv);

}  // namespace jrmpc
