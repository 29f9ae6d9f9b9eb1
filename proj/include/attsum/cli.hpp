#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace attsum::cli {

inline constexpr const char* kVersion = "0.3.0";

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kDataError = 2,
  kInternal = 3,
};

// args excludes the program name. Normal output goes to out, diagnostics to
// err.
int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace attsum::cli
