#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace vidattack::cli {

/// Exit codes: 0 success, 1 I/O failure, 2 validation error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitIo = 1;
inline constexpr int kExitValidation = 2;

/// Runs one `vidattack` invocation; args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace vidattack::cli
