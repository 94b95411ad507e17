#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace windreg::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitModel = 4;

inline constexpr unsigned long long kDefaultSeed = 42;
inline constexpr const char* kSeedEnvVar = "WINDREG_SEED";

/// Runs one command line (args[0] is the program name). Normal output goes to
/// `out`, diagnostics to `err`. Returns the process exit status.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace windreg::cli
