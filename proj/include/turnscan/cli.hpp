#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace turnscan {

inline constexpr int kExitOk = 0;
inline constexpr int kExitStageError = 1;
inline constexpr int kExitUsage = 2;

/// Command-line front end: `simulate`, `reconstruct`, `audit`, `convert`.
/// `args` excludes the program name.
int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int cli_main(int argc, char** argv);

}  // namespace turnscan
