#pragma once

#include <iosfwd>

namespace efmrf {

enum ExitCode : int {
    kExitOk = 0,
    kExitUsage = 1,
    kExitData = 2,
    kExitConvergence = 3,
};

// Subcommands: sample, fit, select, experiment, diagnose. Messages go to err.
int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace efmrf
