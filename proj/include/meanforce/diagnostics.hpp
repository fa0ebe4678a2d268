// diagnostics.hpp — non-fatal warnings raised by the solvers

#pragma once

#include <functional>
#include <string>

namespace meanforce {

using WarningHandler = std::function<void(const std::string&)>;

/// Replace the warning sink and return the previous one. The default writes
/// "meanforce: warning: <msg>" to stderr, each distinct message once.
WarningHandler set_warning_handler(WarningHandler handler);

void warn(const std::string& message);

} // namespace meanforce
