#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace volcast {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumerical = 4;

/// Entry point of the `volcast` tool. `args` excludes the program name.
/// Returns 0 on success, 2 for configuration errors, 3 for data errors and
/// 4 for numerical failures.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace volcast
