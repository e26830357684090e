#pragma once

#include <chrono>
#include <charconv>
#include <stdexcept>
#include <string>
#include <string_view>

namespace epirt {

// Calendar dates are plain day counts; arithmetic (date + days, date - date)
// comes straight from <chrono>.
using Date = std::chrono::sys_days;
using Days = std::chrono::days;

inline Date make_date(int year, unsigned month, unsigned day) {
    std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month},
                                    std::chrono::day{day}};
    if (!ymd.ok()) {
        throw std::invalid_argument("invalid calendar date " + std::to_string(year) + "-" +
                                    std::to_string(month) + "-" + std::to_string(day));
    }
    return Date{ymd};
}

// Parses strict ISO-8601 YYYY-MM-DD.
inline Date parse_date(std::string_view text) {
    auto fail = [&] {
        throw std::invalid_argument("unparseable date '" + std::string(text) +
                                    "' (expected YYYY-MM-DD)");
    };
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') fail();
    int y = 0;
    unsigned m = 0, d = 0;
    auto parse_field = [&](std::string_view part, auto& out) {
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
        if (ec != std::errc{} || ptr != part.data() + part.size()) fail();
    };
    parse_field(text.substr(0, 4), y);
    parse_field(text.substr(5, 2), m);
    parse_field(text.substr(8, 2), d);
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                    std::chrono::day{d}};
    if (!ymd.ok()) fail();
    return Date{ymd};
}

inline std::string format_date(Date date) {
    std::chrono::year_month_day ymd{date};
    char buf[24];
    int y = static_cast<int>(ymd.year());
    unsigned m = static_cast<unsigned>(ymd.month());
    unsigned d = static_cast<unsigned>(ymd.day());
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", y, m, d);
    return std::string(buf);
}

// Signed day count from a to b.
inline long days_between(Date a, Date b) {
    return (b - a).count();
}

}  // namespace epirt
