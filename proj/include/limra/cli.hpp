#pragma once

#include <ostream>

namespace limra::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int { kOk = 0, kInternal = 1, kConfig = 2, kBackend = 3, kData = 4 };

/// Entry point behind the `limra` binary. Output goes to the given streams so
/// tests can drive it in-process.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace limra::cli
