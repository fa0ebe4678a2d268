// table.cpp — CSV serialization

#include "meanforce/table.hpp"

#include "meanforce/error.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

namespace meanforce {

void SweepTable::add_row(std::vector<Cell> row)
{
    if (row.size() != columns.size()) throw ConfigError("row width does not match the table columns");
    rows.push_back(std::move(row));
}

std::size_t SweepTable::column(const std::string& name) const
{
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw ConfigError("no column named " + name);
}

double SweepTable::number(std::size_t row, const std::string& name) const
{
    const Cell& c = rows.at(row).at(column(name));
    if (const auto* d = std::get_if<double>(&c)) return *d;
    if (const auto* i = std::get_if<long long>(&c)) return static_cast<double>(*i);
    return std::numeric_limits<double>::quiet_NaN();
}

std::string format_number(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) v = 0.0;  // drop the sign of -0
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

namespace {

struct CellPrinter {
    std::ostream& out;
    void operator()(std::monostate) const {}
    void operator()(double v) const { out << format_number(v); }
    void operator()(long long v) const { out << v; }
    void operator()(const std::string& s) const
    {
        if (s.find_first_of(",\"\n") == std::string::npos) {
            out << s;
            return;
        }
        out << '"';
        for (char ch : s) {
            if (ch == '"') out << '"';
            out << ch;
        }
        out << '"';
    }
};

} // namespace

void write_csv(const SweepTable& table, std::ostream& out)
{
    for (const auto& [k, v] : table.metadata) out << "# " << k << ": " << v << '\n';
    for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            std::visit(CellPrinter{out}, row[i]);
        }
        out << '\n';
    }
}

std::string to_csv(const SweepTable& table)
{
    std::ostringstream os;
    write_csv(table, os);
    return os.str();
}

} // namespace meanforce
