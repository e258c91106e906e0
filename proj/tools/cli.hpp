#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace swarmphase::cli {

inline constexpr int kExitObserved = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitAbsent = 2;

/// Entry point shared by the executable and the tests. Returns the process
/// exit code; reports go to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace swarmphase::cli
