// cache.hpp — append-only on-disk result store keyed by canonical parameter strings
//
// One record per line: key, tab, payload, tab, 16 hex digits of a 64-bit
// FNV-1a checksum over "key\tpayload". Keys carry the code version, so a new
// release never reads old records. Lines that fail the checksum (a crash
// mid-write, manual edits) are skipped with a warning.

#pragma once

#include <cstddef>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <string>

namespace meanforce {

struct CacheStats {
    std::size_t hits = 0;
    std::size_t misses = 0;
    std::size_t corrupt = 0;   ///< lines skipped while loading
};

class ResultCache {
public:
    /// Empty path keeps records in memory only.
    explicit ResultCache(std::string path = {});

    [[nodiscard]] bool enabled() const { return !path_.empty(); }
    [[nodiscard]] const std::string& path() const { return path_; }

    /// Thread-safe. Counts a hit or a miss.
    std::optional<std::string> get(const std::string& key);
    /// Thread-safe; appends and flushes one record. Keys and payloads must not contain tabs or newlines.
    void put(const std::string& key, const std::string& payload);

    [[nodiscard]] CacheStats stats() const;

private:
    std::string path_;
    std::map<std::string, std::string> records_;
    std::ofstream out_;
    mutable std::mutex mu_;
    CacheStats stats_;
};

/// "v=<version>|" prefix every key gets.
std::string versioned_key(const std::string& key);

/// Shortest decimal text that reads back to the same double ("inf", "nan" included).
std::string key_number(double v);
/// Inverse of key_number; throws std::invalid_argument on malformed text.
double parse_key_number(const std::string& s);

} // namespace meanforce
