// parse.hpp — text forms accepted on the command line and in config files

#pragma once

#include <string>
#include <utility>
#include <vector>

namespace meanforce::cli {

/// Radians, or multiples and fractions of pi: "pi/4", "3pi/4", "-pi/2", "0.5*pi", "pi".
double parse_angle(const std::string& text);

/// Plain number; "inf" is accepted.
double parse_number(const std::string& text);

/// "min:max:count" (linear), "min:max:count:log", "min:max:count:lin",
/// a comma list "a,b,c", or a single value.
std::vector<double> parse_grid(const std::string& text);

std::vector<int> parse_int_list(const std::string& text);
std::vector<std::string> parse_word_list(const std::string& text);

/// Flat "key = value" lines; '#' starts a comment, blank lines are skipped.
/// Throws ConfigError on a line without '=' or an empty key.
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path);

} // namespace meanforce::cli
