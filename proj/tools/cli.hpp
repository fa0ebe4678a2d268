// cli.hpp — the meanforce command-line program as a callable function

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace meanforce::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitConvergence = 3;

/// args excludes the program name. CSV goes to `out` unless --output names a
/// file; diagnostics (cache report, errors) go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace meanforce::cli
