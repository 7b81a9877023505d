#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace factorkit::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailed = 1;  ///< the command ran and reported an error
inline constexpr int kUsage = 2;   ///< bad flags or arguments

/// Environment variable consulted when --out-dir is not given.
inline constexpr const char* kOutDirEnv = "FACTORKIT_OUT_DIR";

/// Runs one invocation. `args` excludes the program name. Results go to `out`;
/// errors go to `err` as a single JSON object.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace factorkit::cli
