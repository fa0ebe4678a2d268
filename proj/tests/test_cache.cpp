#include "meanforce/cache.hpp"
#include "meanforce/diagnostics.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

using namespace meanforce;

namespace {

std::string temp_file(const std::string& name)
{
    const auto dir = std::filesystem::temp_directory_path() / "meanforce_test_cache";
    std::filesystem::create_directories(dir);
    const auto path = dir / name;
    std::filesystem::remove(path);
    return path.string();
}

} // namespace

TEST_CASE("key_number round-trips doubles exactly")
{
    for (double v : {0.0, -0.0, 1.0, 0.1, 1.0 / 3.0, 6.02214076e23, 5e-324, -2.5e-300,
                     std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()}) {
        const double back = parse_key_number(key_number(v));
        CHECK(back == v);
        CHECK(std::signbit(back) == std::signbit(v));
    }
    CHECK(std::isnan(parse_key_number(key_number(std::nan("")))));
    CHECK_THROWS(parse_key_number("1.5x"));
    CHECK_THROWS(parse_key_number(""));
}

TEST_CASE("records persist across instances and count hits")
{
    const std::string path = temp_file("persist.cache");
    {
        ResultCache c(path);
        CHECK(!c.get("a"));
        c.put("a", "1 2 3");
        CHECK(*c.get("a") == "1 2 3");
        CHECK(c.stats().hits == 1);
        CHECK(c.stats().misses == 1);
    }
    ResultCache c(path);
    CHECK(*c.get("a") == "1 2 3");
    CHECK(!c.get("b"));
    CHECK_THROWS(c.put("tab\tkey", "x"));
}

TEST_CASE("corrupt lines are skipped with a warning")
{
    const std::string path = temp_file("corrupt.cache");
    {
        ResultCache c(path);
        c.put("good", "value");
        c.put("other", "thing");
    }
    {
        std::ofstream f(path, std::ios::app);
        f << "no separators here\n";
        f << "key\tpayload\t0000000000000000\n";
    }
    // Truncate the second record's checksum by one character.
    std::string text;
    {
        std::ifstream f(path);
        text.assign(std::istreambuf_iterator<char>(f), {});
    }
    const auto second = text.find("other");
    const auto eol = text.find('\n', second);
    text.erase(eol - 1, 1);
    {
        std::ofstream f(path, std::ios::trunc);
        f << text;
    }
    std::vector<std::string> warnings;
    const auto old = set_warning_handler([&](const std::string& m) { warnings.push_back(m); });
    ResultCache c(path);
    set_warning_handler(old);
    CHECK(c.stats().corrupt == 3);
    CHECK(warnings.size() == 3);
    CHECK(c.get("good").value_or("") == "value");
    CHECK(!c.get("other"));
    CHECK(!c.get("key"));
}

TEST_CASE("versioned keys carry the code version")
{
    CHECK(versioned_key("x") == std::string("v=") + MEANFORCE_VERSION + "|x");
}

TEST_CASE("a disabled cache never stores")
{
    ResultCache c;
    CHECK(!c.enabled());
    c.put("a", "b");
    CHECK(c.get("a").value_or("") == "b");
}
