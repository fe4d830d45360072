#pragma once

#include <iosfwd>
#include <string>

namespace dnstat::cli {

inline constexpr const char* kVersion = "0.1.0";

/// Exit codes: 0 success (whatever the verdicts), 1 computation error,
/// 2 configuration or usage error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitComputation = 1;
inline constexpr int kExitConfig = 2;

/// Runs one command line; writes results to `out` and diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dnstat::cli
