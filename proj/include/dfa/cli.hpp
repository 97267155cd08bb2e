#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dfa::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumerical = 4;

/// Environment variable naming the default output directory.
inline constexpr const char* kOutDirEnv = "DFA_OUT_DIR";

/// Runs one subcommand. `args` excludes the program name. Progress and
/// summaries go to `out`; failures print a single JSON object line to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace dfa::cli
