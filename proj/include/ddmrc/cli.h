#pragma once

// Command-line entry points: simulate, synth, verify, experiment.

#include <iosfwd>
#include <string>
#include <vector>

namespace ddmrc {

enum ExitCode : int {
  kExitOk = 0,
  kExitNotInformative = 1,
  kExitInputError = 2,
  kExitSolverFailure = 3,
};

/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ddmrc
