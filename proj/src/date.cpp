#include "regimevol/date.hpp"

#include <array>
#include <cstdio>

#include "regimevol/error.hpp"

namespace regimevol {

namespace {

bool is_leap(int year) {
    return (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
}

int days_in_month(int year, int month) {
    static constexpr std::array<int, 12> kDays = {31, 28, 31, 30, 31, 30,
                                                  31, 31, 30, 31, 30, 31};
    if (month == 2 && is_leap(year)) return 29;
    return kDays[static_cast<std::size_t>(month - 1)];
}

}  // namespace

bool Date::valid() const {
    if (month < 1 || month > 12) return false;
    if (day < 1 || day > days_in_month(year, month)) return false;
    return true;
}

std::string Date::to_string() const {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
    return buf;
}

Date Date::parse(std::string_view text) {
    int y = 0, m = 0, d = 0;
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
        fail(ErrorCode::ParseError, "expected YYYY-MM-DD, got '" + std::string(text) + "'");
    }
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (i == 4 || i == 7) continue;
        char c = text[i];
        if (c < '0' || c > '9') {
            fail(ErrorCode::ParseError, "expected YYYY-MM-DD, got '" + std::string(text) + "'");
        }
        int digit = c - '0';
        if (i < 4) {
            y = y * 10 + digit;
        } else if (i < 7) {
            m = m * 10 + digit;
        } else {
            d = d * 10 + digit;
        }
    }
    Date date{y, m, d};
    if (!date.valid()) {
        fail(ErrorCode::ParseError, "invalid calendar date '" + std::string(text) + "'");
    }
    return date;
}

}  // namespace regimevol
