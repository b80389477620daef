#pragma once

#include <iosfwd>

namespace freqlab::cli {

/// Exit codes of the public command-line contract.
enum ExitCode : int {
  kOk = 0,
  kFailure = 1,     ///< unexpected internal error
  kValidation = 2,  ///< bad flags, bad inputs, domain errors
  kDiverged = 3,    ///< the grid simulation left the stability guard
};

int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace freqlab::cli
