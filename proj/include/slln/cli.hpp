#pragma once

#include <iostream>

namespace slln::cli {

enum ExitCode : int {
  kOk = 0,
  kToolFailure = 1,  // I/O and other runtime failures
  kConfigInvalid = 2,
  kViolation = 3,    // a verification found a mathematical violation
  kUsage = 64,
};

/// Environment variable naming the default output directory.
inline constexpr const char* kOutputDirEnv = "SLLN_LAB_OUTPUT_DIR";
inline constexpr const char* kDefaultOutputDir = "slln-out";

int parse_and_dispatch(int argc, const char* const* argv, std::ostream& out = std::cout,
                       std::ostream& err = std::cerr);

}  // namespace slln::cli
