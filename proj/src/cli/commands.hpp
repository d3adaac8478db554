// SPDX-License-Identifier: MIT
#pragma once

#include <ostream>

namespace mfstop::cli {

enum ExitCode : int {
    kOk = 0,
    kConfigError = 2,
    kSolverError = 3,
    kSimulationError = 4,
    kDesignError = 5,
};

/// Entry point shared by the executable and the tests.
int run_cli(int argc, const char* const argv[], std::ostream& out, std::ostream& err);

}  // namespace mfstop::cli
