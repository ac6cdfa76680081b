#ifndef VIEWCAST_DATE_HPP
#define VIEWCAST_DATE_HPP

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace viewcast {

/// Calendar date. Parsed strictly as ISO-8601 (YYYY-MM-DD), no locale formats.
struct Date {
    int year = 1970;
    int month = 1;
    int day = 1;

    auto operator<=>(const Date&) const = default;

    static bool is_valid(int y, int m, int d);
    static std::optional<Date> parse(std::string_view text);

    std::string to_string() const;

    /// Days since 1970-01-01 (negative before).
    std::int64_t serial() const;

    /// 0 = Monday .. 6 = Sunday.
    int day_of_week() const;
};

}  // namespace viewcast

#endif
