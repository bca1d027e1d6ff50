#pragma once

// Reference implementations used only by tests. They are written
// independently of the library code (no std::chrono, no shared helpers) so
// agreement is meaningful.

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace oracle {

inline bool leap(std::int64_t y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

inline int month_length(std::int64_t y, int m) {
    static constexpr int len[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return m == 2 && leap(y) ? 29 : len[m - 1];
}

struct Date {
    std::int64_t y;
    int m;
    int d;
    bool operator==(const Date&) const = default;
};

/// Walks the calendar one day at a time from 1970-01-01; `days` may be
/// negative. Linear cost, fine for test ranges.
class CalendarWalk {
public:
    /// All dates in [from_year-01-01, to_year-12-31] with their day numbers.
    static std::vector<std::pair<std::int64_t, Date>> range(std::int64_t from_year, std::int64_t to_year) {
        std::int64_t day = 0;
        for (std::int64_t y = 1970; y < from_year; ++y)
            day += leap(y) ? 366 : 365;
        for (std::int64_t y = from_year; y < 1970; ++y)
            day -= leap(y) ? 366 : 365;
        std::vector<std::pair<std::int64_t, Date>> out;
        for (std::int64_t y = from_year; y <= to_year; ++y)
            for (int m = 1; m <= 12; ++m)
                for (int d = 1; d <= month_length(y, m); ++d)
                    out.push_back({day++, Date{y, m, d}});
        return out;
    }
};

/// Weekday of a day number by counting from a known Monday (1970-01-05 is
/// day 4). Monday = 0.
inline int weekday(std::int64_t day) {
    std::int64_t r = (day - 4) % 7;
    return int(r < 0 ? r + 7 : r);
}

/// ISO week by the "week 1 contains January 4th" rule: find the Monday that
/// starts week 1 of each candidate year and pick the latest one not after
/// `day`.
inline std::pair<std::int64_t, int> iso_week(std::int64_t day, const std::map<std::int64_t, std::int64_t>& jan4) {
    std::int64_t best_year = 0, best_start = 0;
    bool found = false;
    for (const auto& [y, d4] : jan4) {
        const std::int64_t start = d4 - weekday(d4);
        if (start <= day && (!found || start > best_start)) {
            best_year = y;
            best_start = start;
            found = true;
        }
    }
    return {best_year, int((day - best_start) / 7 + 1)};
}

/// Largest d dividing every value, by trial from the minimum downwards.
inline std::int64_t gcd_brute(const std::vector<std::int64_t>& xs) {
    std::int64_t lo = *std::min_element(xs.begin(), xs.end());
    for (std::int64_t d = lo; d >= 1; --d) {
        bool all = true;
        for (auto x : xs)
            if (x % d != 0) {
                all = false;
                break;
            }
        if (all)
            return d;
    }
    return 1;
}

/// Maximal runs of absent values on the grid lo, lo+m, ..., hi.
struct Run {
    std::int64_t from, to, n;
    bool operator==(const Run&) const = default;
};

inline std::vector<Run> gap_runs(const std::set<std::int64_t>& present, std::int64_t lo, std::int64_t hi,
                                 std::int64_t m) {
    std::vector<Run> runs;
    for (std::int64_t t = lo; t <= hi; t += m) {
        if (present.count(t))
            continue;
        if (!runs.empty() && runs.back().to + m == t) {
            runs.back().to = t;
            ++runs.back().n;
        } else {
            runs.push_back({t, t, 1});
        }
    }
    return runs;
}

/// Window count formulas for a series of length n.
inline std::size_t slide_count(std::size_t n, std::size_t size, std::size_t step) {
    return n < size ? 0 : (n - size) / step + 1;
}
inline std::size_t tile_count(std::size_t n, std::size_t size) { return n / size; }
inline std::size_t stretch_count(std::size_t n, std::size_t init, std::size_t step) {
    return n < init ? 0 : (n - init) / step + 1;
}

} // namespace oracle
