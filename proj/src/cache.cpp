// cache.cpp — checksummed line records, loaded once and appended under a mutex

#include "meanforce/cache.hpp"

#include "meanforce/diagnostics.hpp"
#include "meanforce/error.hpp"
#include "meanforce/model.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <stdexcept>

namespace meanforce {

namespace {

std::string checksum(const std::string& text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace

std::string key_number(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_key_number(const std::string& s)
{
    if (s == "nan") return std::nan("");
    if (s == "inf") return kInf;
    if (s == "-inf") return -kInf;
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) throw std::invalid_argument("bad number: " + s);
    return v;
}

std::string versioned_key(const std::string& key) { return std::string("v=") + MEANFORCE_VERSION + "|" + key; }

ResultCache::ResultCache(std::string path) : path_(std::move(path))
{
    if (path_.empty()) return;
    const auto parent = std::filesystem::path(path_).parent_path();
    std::error_code ec;
    if (!parent.empty()) std::filesystem::create_directories(parent, ec);
    {
        std::ifstream in(path_);
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            const auto a = line.find('\t');
            const auto b = line.rfind('\t');
            if (a == std::string::npos || a == b || checksum(line.substr(0, b)) != line.substr(b + 1)) {
                ++stats_.corrupt;
                warn("cache " + path_ + ": skipping corrupt line " + std::to_string(line_no));
                continue;
            }
            records_[line.substr(0, a)] = line.substr(a + 1, b - a - 1);
        }
    }
    out_.open(path_, std::ios::app | std::ios::binary);
    if (!out_) throw ConfigError("cache file " + path_ + " is not writable");
}

std::optional<std::string> ResultCache::get(const std::string& key)
{
    std::lock_guard<std::mutex> lock(mu_);
    auto it = records_.find(key);
    if (it == records_.end()) {
        ++stats_.misses;
        return std::nullopt;
    }
    ++stats_.hits;
    return it->second;
}

void ResultCache::put(const std::string& key, const std::string& payload)
{
    if (key.find_first_of("\t\n") != std::string::npos || payload.find_first_of("\t\n") != std::string::npos)
        throw ConfigError("cache records may not contain tabs or newlines");
    std::lock_guard<std::mutex> lock(mu_);
    records_[key] = payload;
    if (!out_.is_open()) return;
    const std::string body = key + '\t' + payload;
    out_ << body << '\t' << checksum(body) << '\n';
    out_.flush();
}

CacheStats ResultCache::stats() const
{
    std::lock_guard<std::mutex> lock(mu_);
    return stats_;
}

} // namespace meanforce
