#pragma once

#include <iosfwd>

namespace sfd::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,    // bad flags or configuration
  kIo = 2,       // files, registration, dataset, checkpoint
  kNumeric = 3,  // NaN/Inf, shape or contract failures
};

/// Entry point for the `sfd` tool: fuse, train, eval, selftest.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace sfd::cli
