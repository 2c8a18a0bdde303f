#pragma once

#include <string>

namespace mlpsel {

inline constexpr const char* kVersion = "1.0.0";

/// Entry point of the mlpsel command line. Returns 0 on success, 1 on a usage
/// error (message and help on stderr), 2 on a runtime failure.
int run_cli(int argc, char** argv);

}  // namespace mlpsel
