#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace regimevol {

/// Calendar date (proleptic Gregorian). Only needs ordering, ISO-8601
/// round-tripping, and month arithmetic for the monthly bucketing used
/// by the mixed-frequency alignment.
struct Date {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31

    auto operator<=>(const Date&) const = default;

    /// Months since year 0, used as the low-frequency bucket key.
    int month_key() const { return year * 12 + (month - 1); }

    Date first_of_month() const { return Date{year, month, 1}; }

    Date add_months(int k) const {
        int key = month_key() + k;
        int y = key / 12;
        int m = key % 12;
        if (m < 0) {
            m += 12;
            y -= 1;
        }
        return Date{y, m + 1, day};
    }

    bool valid() const;

    std::string to_string() const;  // YYYY-MM-DD

    /// Parses YYYY-MM-DD; throws Error(ParseError) on malformed input.
    static Date parse(std::string_view text);

    static Date from_month_key(int key) {
        int y = key / 12;
        int m = key % 12;
        if (m < 0) {
            m += 12;
            y -= 1;
        }
        return Date{y, m + 1, 1};
    }
};

}  // namespace regimevol
