// error.hpp — exception types shared by every solver

#pragma once

#include <stdexcept>
#include <string>

namespace meanforce {

/// Invalid parameters or an unsupported request. Maps to CLI exit code 2.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical procedure hit its refinement limit. Maps to CLI exit code 3.
class ConvergenceError : public std::runtime_error {
public:
    explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace meanforce
