#pragma once

#include <ostream>

namespace gandalf::cli {

enum ExitCode : int {
  kOk = 0,
  kTrapped = 1,
  kUsage = 2,
  kExpectationFailure = 3,
};

/// Entry point of the `gandalf` tool with injectable streams.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gandalf::cli
