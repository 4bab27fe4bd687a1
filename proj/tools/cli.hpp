#pragma once

#include <iosfwd>

namespace twinverify::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitRefuted = 1,        // NotSatisfied, rejected hypothesis, unmet suite expectation
  kExitResourceLimit = 2,  // a classical search hit its cap
  kExitUsage = 3,          // usage, parse, model or I/O error
};

/// Runs `twinverify <check|smc|ingest|suite> ...`. Reports go to `out` (or
/// the --output file), diagnostics to `err`. Never throws.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace twinverify::cli
