#pragma once

#include <string>
#include <vector>

namespace graphite::cli {

// Exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitCapability = 3;

// Entry point shared by the executable and the tests. args[0] is the
// program name.
int run(const std::vector<std::string>& args);

}  // namespace graphite::cli
