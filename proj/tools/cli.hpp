#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace statevc::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 1;
inline constexpr int kStoreError = 2;
inline constexpr int kRejected = 3;
inline constexpr int kUnknownId = 4;

/// Runs one `statevc` invocation; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace statevc::cli
