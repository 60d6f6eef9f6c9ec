#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace modus {

inline constexpr const char* kVersion = "0.1.0";

// Exit codes of run_command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitIo = 2;

// Runs one subcommand. `args` excludes the program name. Human-readable
// output goes to `out`, diagnostics to `err`.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace modus
