// table.hpp — column-typed result tables and their CSV form

#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace meanforce {

/// Empty cells (std::monostate) print as nothing.
using Cell = std::variant<std::monostate, double, long long, std::string>;

struct SweepTable {
    std::vector<std::pair<std::string, std::string>> metadata;  ///< printed as "# key: value"
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> row);
    [[nodiscard]] std::size_t column(const std::string& name) const;  ///< throws ConfigError if absent
    [[nodiscard]] double number(std::size_t row, const std::string& name) const;
};

/// Doubles use 12 significant digits in the classic locale; inf and nan print as "inf" and "nan".
std::string format_number(double v);
void write_csv(const SweepTable& table, std::ostream& out);
std::string to_csv(const SweepTable& table);

} // namespace meanforce
