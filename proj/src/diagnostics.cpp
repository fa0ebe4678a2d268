// diagnostics.cpp — process-wide warning sink

#include "meanforce/diagnostics.hpp"

#include <iostream>
#include <mutex>
#include <set>

namespace meanforce {

namespace {

std::mutex& sink_mutex()
{
    static std::mutex mu;
    return mu;
}

void print_once(const std::string& message)
{
    static std::set<std::string> seen;
    if (seen.insert(message).second) std::cerr << "meanforce: warning: " << message << '\n';
}

WarningHandler& current()
{
    static WarningHandler h = print_once;
    return h;
}

} // namespace

WarningHandler set_warning_handler(WarningHandler handler)
{
    std::lock_guard<std::mutex> lock(sink_mutex());
    WarningHandler old = std::move(current());
    current() = handler ? std::move(handler) : WarningHandler(print_once);
    return old;
}

void warn(const std::string& message)
{
    std::lock_guard<std::mutex> lock(sink_mutex());
    current()(message);
}

} // namespace meanforce
