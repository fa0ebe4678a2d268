// parse.cpp — angle tokens, grid specs and key = value files

#include "parse.hpp"

#include "meanforce/error.hpp"
#include "meanforce/model.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace meanforce::cli {

namespace {

std::string trim(const std::string& s)
{
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> parts;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, sep)) parts.push_back(trim(item));
    if (!s.empty() && s.back() == sep) parts.emplace_back();
    return parts;
}

} // namespace

double parse_number(const std::string& text)
{
    const std::string t = trim(text);
    if (t == "inf" || t == "+inf") return kInf;
    double v = 0.0;
    const char* first = t.data();
    if (!t.empty() && t[0] == '+') ++first;
    const auto res = std::from_chars(first, t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size())
        throw ConfigError("not a number: '" + text + "'");
    return v;
}

double parse_angle(const std::string& text)
{
    const std::string t = trim(text);
    const auto pos = t.find("pi");
    if (pos == std::string::npos) return parse_number(t);
    std::string factor = t.substr(0, pos);
    if (!factor.empty() && factor.back() == '*') factor.pop_back();
    double mult = 1.0;
    if (factor == "-") mult = -1.0;
    else if (!factor.empty() && factor != "+") mult = parse_number(factor);
    const std::string rest = t.substr(pos + 2);
    double div = 1.0;
    if (!rest.empty()) {
        if (rest[0] != '/') throw ConfigError("bad angle: '" + text + "'");
        div = parse_number(rest.substr(1));
        if (div == 0.0) throw ConfigError("bad angle: '" + text + "'");
    }
    return mult * kPi / div;
}

std::vector<double> parse_grid(const std::string& text)
{
    const std::string t = trim(text);
    if (t.empty()) throw ConfigError("empty grid");
    if (t.find(':') != std::string::npos) {
        const auto parts = split(t, ':');
        if (parts.size() < 3 || parts.size() > 4) throw ConfigError("grid must be min:max:count[:log|:lin], got '" + text + "'");
        const double lo = parse_number(parts[0]);
        const double hi = parse_number(parts[1]);
        const double count_d = parse_number(parts[2]);
        const int count = static_cast<int>(count_d);
        if (count < 1 || count != count_d) throw ConfigError("grid count must be a positive integer in '" + text + "'");
        const std::string kind = parts.size() == 4 ? parts[3] : "lin";
        if (kind != "lin" && kind != "log") throw ConfigError("grid spacing must be lin or log in '" + text + "'");
        if (!std::isfinite(lo) || !std::isfinite(hi)) throw ConfigError("grid ends must be finite in '" + text + "'");
        if (count == 1 && lo != hi) throw ConfigError("a one-point grid needs min = max in '" + text + "'");
        if (kind == "log" && !(lo > 0.0 && hi > 0.0)) throw ConfigError("log grid needs positive ends in '" + text + "'");
        std::vector<double> g(count);
        for (int i = 0; i < count; ++i) {
            const double f = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
            g[i] = kind == "log" ? std::exp(std::log(lo) + f * (std::log(hi) - std::log(lo))) : lo + f * (hi - lo);
        }
        g.front() = lo;
        g.back() = hi;
        return g;
    }
    std::vector<double> g;
    for (const auto& item : split(t, ',')) g.push_back(parse_number(item));
    return g;
}

std::vector<int> parse_int_list(const std::string& text)
{
    std::vector<int> v;
    for (const auto& item : split(trim(text), ',')) {
        const double d = parse_number(item);
        if (d != std::floor(d) || std::abs(d) > 1e9) throw ConfigError("not an integer: '" + item + "'");
        v.push_back(static_cast<int>(d));
    }
    if (v.empty()) throw ConfigError("empty list");
    return v;
}

std::vector<std::string> parse_word_list(const std::string& text)
{
    std::vector<std::string> v;
    for (const auto& item : split(trim(text), ',')) {
        if (item.empty()) throw ConfigError("empty entry in list '" + text + "'");
        v.push_back(item);
    }
    if (v.empty()) throw ConfigError("empty list");
    return v;
}

std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path);
    std::vector<std::pair<std::string, std::string>> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError(path + ":" + std::to_string(line_no) + ": empty key");
        for (auto& ch : key)
            if (ch == '_') ch = '-';
        entries.emplace_back(key, trim(line.substr(eq + 1)));
    }
    return entries;
}

} // namespace meanforce::cli
