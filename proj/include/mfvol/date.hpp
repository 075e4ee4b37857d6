#pragma once

#include <chrono>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace mfvol {

/// Calendar date (no time-of-day) with ISO-8601 text form.
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::chrono::sys_days days) : days_(days) {}
    constexpr Date(int y, unsigned m, unsigned d)
        : days_(std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d}) {}

    static Date parse(std::string_view text) {
        int y = 0;
        unsigned m = 0, d = 0;
        char tail = 0;
        const std::string s(text);
        if (s.size() != 10 || std::sscanf(s.c_str(), "%4d-%2u-%2u%c", &y, &m, &d, &tail) != 3) {
            throw Error(Errc::data, "date", "unparseable date '" + s + "'");
        }
        const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                              std::chrono::day{d}};
        if (!ymd.ok()) throw Error(Errc::data, "date", "invalid calendar date '" + s + "'");
        return Date(std::chrono::sys_days(ymd));
    }

    std::string iso() const {
        const std::chrono::year_month_day ymd(days_);
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                      static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
        return buf;
    }

    constexpr std::chrono::sys_days days() const { return days_; }
    constexpr std::chrono::year_month_day ymd() const { return std::chrono::year_month_day(days_); }
    int year() const { return static_cast<int>(ymd().year()); }
    unsigned month() const { return static_cast<unsigned>(ymd().month()); }
    bool is_weekday() const {
        const std::chrono::weekday wd(days_);
        return wd != std::chrono::Saturday && wd != std::chrono::Sunday;
    }

    /// Last Monday-to-Friday day of this date's calendar month.
    Date last_weekday_of_month() const {
        const auto ymd_ = ymd();
        Date d(std::chrono::sys_days(ymd_.year() / ymd_.month() / std::chrono::last));
        while (!d.is_weekday()) d = d.plus_days(-1);
        return d;
    }

    Date plus_days(int n) const { return Date(days_ + std::chrono::days{n}); }
    friend long days_between(Date from, Date to) { return (to.days_ - from.days_).count(); }

    friend constexpr auto operator<=>(const Date&, const Date&) = default;

private:
    std::chrono::sys_days days_{};
};

inline bool same_month(Date a, Date b) { return a.year() == b.year() && a.month() == b.month(); }

/// Indices of the last trading day of each month in a sorted date list. The
/// final date counts only if it is the last weekday of its month, so that
/// appending later dates never changes earlier month ends.
inline std::vector<std::size_t> month_end_indices(const std::vector<Date>& dates) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < dates.size(); ++i) {
        const bool last = i + 1 == dates.size();
        if (last ? dates[i] == dates[i].last_weekday_of_month() : !same_month(dates[i], dates[i + 1])) {
            out.push_back(i);
        }
    }
    return out;
}

}  // namespace mfvol
