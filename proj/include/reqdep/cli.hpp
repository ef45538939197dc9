#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace reqdep::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsageError = 2;

/// args excludes the program name. Output goes to `out`, diagnostics and help on usage errors to `err`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int dispatch(int argc, const char* const* argv);

}  // namespace reqdep::cli
