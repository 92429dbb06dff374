#pragma once

#include <string>
#include <vector>

namespace nematic::cli {

enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kNoConvergence = 2,
  kSignViolation = 3,
  kRefusedMode = 4,
  kUsage = 64,
};

inline constexpr const char* kSchemaVersion = "1.0.0";

/// Entry point shared by the executable and the tests. argv[0] is the program name.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace nematic::cli
