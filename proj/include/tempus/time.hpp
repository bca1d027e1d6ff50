#pragma once

#include <array>
#include <charconv>
#include <chrono>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include "tempus/adapter.hpp"
#include "tempus/error.hpp"

namespace tempus {

enum class Granularity : std::uint8_t {
    year,
    quarter,
    month,
    week,
    day,
    hour,
    minute,
    second,
    millisecond,
    ordinal,
};

constexpr bool is_calendar(Granularity g) noexcept { return g != Granularity::ordinal; }

/// Finer than a day: ticks count a fixed number of milliseconds.
constexpr bool is_sub_day(Granularity g) noexcept {
    return g == Granularity::hour || g == Granularity::minute || g == Granularity::second ||
           g == Granularity::millisecond;
}

/// Larger is coarser. Ordinal has no rank.
constexpr int coarseness(Granularity g) noexcept {
    switch (g) {
    case Granularity::year: return 8;
    case Granularity::quarter: return 7;
    case Granularity::month: return 6;
    case Granularity::week: return 5;
    case Granularity::day: return 4;
    case Granularity::hour: return 3;
    case Granularity::minute: return 2;
    case Granularity::second: return 1;
    case Granularity::millisecond: return 0;
    case Granularity::ordinal: break;
    }
    return -1;
}

/// True when `a` is the same as or coarser than `b`; false whenever either
/// side is ordinal and they differ.
constexpr bool coarser_or_equal(Granularity a, Granularity b) noexcept {
    if (a == b)
        return true;
    if (!is_calendar(a) || !is_calendar(b))
        return false;
    return coarseness(a) > coarseness(b);
}

constexpr std::string_view to_string(Granularity g) noexcept {
    switch (g) {
    case Granularity::year: return "year";
    case Granularity::quarter: return "quarter";
    case Granularity::month: return "month";
    case Granularity::week: return "week";
    case Granularity::day: return "day";
    case Granularity::hour: return "hour";
    case Granularity::minute: return "minute";
    case Granularity::second: return "second";
    case Granularity::millisecond: return "millisecond";
    case Granularity::ordinal: return "ordinal";
    }
    return "?";
}

constexpr std::string_view unit_letter(Granularity g) noexcept {
    switch (g) {
    case Granularity::year: return "Y";
    case Granularity::quarter: return "Q";
    case Granularity::month: return "M";
    case Granularity::week: return "W";
    case Granularity::day: return "D";
    case Granularity::hour: return "h";
    case Granularity::minute: return "m";
    case Granularity::second: return "s";
    case Granularity::millisecond: return "ms";
    case Granularity::ordinal: return "";
    }
    return "";
}

inline std::optional<Granularity> parse_granularity(std::string_view s) noexcept {
    for (auto g : {Granularity::year, Granularity::quarter, Granularity::month, Granularity::week,
                   Granularity::day, Granularity::hour, Granularity::minute, Granularity::second,
                   Granularity::millisecond, Granularity::ordinal}) {
        if (s == to_string(g))
            return g;
    }
    return std::nullopt;
}

/// Milliseconds per tick for sub-day granularities.
constexpr std::int64_t unit_ms(Granularity g) noexcept {
    switch (g) {
    case Granularity::hour: return 3'600'000;
    case Granularity::minute: return 60'000;
    case Granularity::second: return 1'000;
    case Granularity::millisecond: return 1;
    default: return 0;
    }
}

/// An instant counted in whole granularity units since 1970-01-01 00:00:00.
/// Sub-day ticks are UTC; the zone label only shifts rendering and calendar
/// flooring. `kind` names a registered index adapter and is empty for the
/// built-in granularities (adapter values use ordinal granularity).
struct TimePoint {
    std::int64_t ticks = 0;
    Granularity granularity = Granularity::ordinal;
    std::string zone;
    std::string kind;

    bool comparable_with(const TimePoint& other) const noexcept {
        return granularity == other.granularity && kind == other.kind;
    }

    friend bool operator==(const TimePoint& a, const TimePoint& b) noexcept {
        return a.comparable_with(b) && a.ticks == b.ticks;
    }

    /// Unordered when the granularities (or adapter kinds) differ.
    friend std::partial_ordering operator<=>(const TimePoint& a, const TimePoint& b) noexcept {
        if (!a.comparable_with(b))
            return std::partial_ordering::unordered;
        return a.ticks <=> b.ticks;
    }
};

inline TimePoint make_time(Granularity g, std::int64_t ticks, std::string zone = {}) {
    return TimePoint{ticks, g, std::move(zone), {}};
}

namespace detail {

constexpr std::int64_t ms_per_day = 86'400'000;

constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) noexcept {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0)))
        --q;
    return q;
}

constexpr std::int64_t floor_mod(std::int64_t a, std::int64_t b) noexcept {
    return a - floor_div(a, b) * b;
}

inline std::int64_t days_from_civil(int y, unsigned m, unsigned d) {
    using namespace std::chrono;
    const year_month_day ymd{year{y}, month{m}, day{d}};
    if (!ymd.ok())
        throw parse_error("invalid calendar date " + std::to_string(y) + "-" + std::to_string(m) +
                          "-" + std::to_string(d));
    return sys_days{ymd}.time_since_epoch().count();
}

struct Civil {
    int year;
    unsigned month;
    unsigned day;
};

inline Civil civil_from_days(std::int64_t days) {
    using namespace std::chrono;
    const year_month_day ymd{sys_days{std::chrono::days{days}}};
    return {int(ymd.year()), unsigned(ymd.month()), unsigned(ymd.day())};
}

/// Monday = 0 ... Sunday = 6.
inline unsigned iso_weekday(std::int64_t days) noexcept {
    // 1970-01-01 was a Thursday.
    return unsigned(floor_mod(days + 3, 7));
}

/// Day number of the first day of the period with the given calendar tick.
inline std::int64_t period_start_day(Granularity g, std::int64_t ticks) {
    switch (g) {
    case Granularity::year:
        return days_from_civil(int(1970 + ticks), 1, 1);
    case Granularity::quarter:
        return days_from_civil(int(1970 + floor_div(ticks, 4)), unsigned(floor_mod(ticks, 4) * 3 + 1), 1);
    case Granularity::month:
        return days_from_civil(int(1970 + floor_div(ticks, 12)), unsigned(floor_mod(ticks, 12) + 1), 1);
    case Granularity::week:
        return ticks * 7 - 3;
    case Granularity::day:
        return ticks;
    default:
        throw precondition_error("period_start_day needs a day-or-coarser granularity");
    }
}

/// Calendar tick at granularity `g` (day or coarser) of the period holding `days`.
inline std::int64_t tick_of_day(Granularity g, std::int64_t days) {
    if (g == Granularity::day)
        return days;
    if (g == Granularity::week)
        return floor_div(days + 3, 7);
    const Civil c = civil_from_days(days);
    const std::int64_t years = c.year - 1970;
    switch (g) {
    case Granularity::year: return years;
    case Granularity::quarter: return years * 4 + (c.month - 1) / 3;
    case Granularity::month: return years * 12 + (c.month - 1);
    default: throw precondition_error("tick_of_day needs a day-or-coarser granularity");
    }
}

/// Accepts "UTC", "GMT", "Z", "Etc/UTC", "+10:00", "-0530", "UTC+10",
/// "UTC-03:30". Anything else is a label without a known offset.
inline std::optional<std::int64_t> zone_offset_seconds(std::string_view zone) noexcept {
    if (zone.empty() || zone == "UTC" || zone == "GMT" || zone == "Z" || zone == "Etc/UTC")
        return 0;
    std::string_view rest = zone;
    if (rest.starts_with("UTC") || rest.starts_with("GMT"))
        rest.remove_prefix(3);
    if (rest.empty() || (rest[0] != '+' && rest[0] != '-'))
        return std::nullopt;
    const int sign = rest[0] == '-' ? -1 : 1;
    rest.remove_prefix(1);
    std::string digits;
    for (char c : rest) {
        if (c >= '0' && c <= '9')
            digits.push_back(c);
        else if (c != ':')
            return std::nullopt;
    }
    int hh = 0, mm = 0;
    if (digits.size() <= 2 && !digits.empty()) {
        hh = std::stoi(digits);
    } else if (digits.size() == 4) {
        hh = std::stoi(digits.substr(0, 2));
        mm = std::stoi(digits.substr(2, 2));
    } else {
        return std::nullopt;
    }
    if (hh > 14 || mm > 59)
        return std::nullopt;
    return sign * (hh * 3600 + mm * 60);
}

inline std::int64_t zone_offset_ms(std::string_view zone) noexcept {
    return zone_offset_seconds(zone).value_or(0) * 1000;
}

/// Wall-clock milliseconds since the epoch at the start of the period `t`
/// names. For sub-day granularities the zone offset is applied.
inline std::int64_t local_start_ms(const TimePoint& t) {
    if (is_sub_day(t.granularity))
        return t.ticks * unit_ms(t.granularity) + zone_offset_ms(t.zone);
    return period_start_day(t.granularity, t.ticks) * ms_per_day;
}

constexpr std::array<std::string_view, 12> month_abbrev{"Jan", "Feb", "Mar", "Apr", "May", "Jun",
                                                        "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"};

inline std::string pad(std::int64_t v, int width) {
    std::string s = std::to_string(v < 0 ? -v : v);
    if (int(s.size()) < width)
        s.insert(0, std::size_t(width) - s.size(), '0');
    return v < 0 ? "-" + s : s;
}

/// Small cursor over text used by the canonical and pattern parsers.
struct Scanner {
    std::string_view s;
    std::size_t pos = 0;

    bool done() const noexcept { return pos == s.size(); }
    bool peek(char c) const noexcept { return pos < s.size() && s[pos] == c; }
    bool eat(char c) noexcept {
        if (!peek(c))
            return false;
        ++pos;
        return true;
    }
    void skip_spaces() noexcept {
        while (pos < s.size() && s[pos] == ' ')
            ++pos;
    }
    /// Reads between `min` and `max` digits.
    std::optional<std::int64_t> digits(std::size_t min, std::size_t max) noexcept {
        std::size_t end = pos;
        while (end < s.size() && end - pos < max && s[end] >= '0' && s[end] <= '9')
            ++end;
        if (end - pos < min)
            return std::nullopt;
        std::int64_t v = 0;
        std::from_chars(s.data() + pos, s.data() + end, v);
        pos = end;
        return v;
    }
    std::optional<unsigned> month_name() noexcept {
        if (s.size() - pos < 3)
            return std::nullopt;
        for (unsigned i = 0; i < 12; ++i) {
            const auto m = month_abbrev[i];
            bool match = true;
            for (std::size_t k = 0; k < 3; ++k) {
                const char a = s[pos + k];
                const char b = m[k];
                if ((a | 0x20) != (b | 0x20))
                    match = false;
            }
            if (match) {
                pos += 3;
                return i + 1;
            }
        }
        return std::nullopt;
    }
};

inline std::int64_t iso_week_tick(std::int64_t iso_year, std::int64_t week) {
    const std::int64_t jan4 = days_from_civil(int(iso_year), 1, 4);
    const std::int64_t week1_monday = jan4 - iso_weekday(jan4);
    return floor_div(week1_monday + 7 * (week - 1) + 3, 7);
}

struct IsoWeek {
    std::int64_t year;
    std::int64_t week;
};

inline IsoWeek iso_week_of_tick(std::int64_t tick) {
    const std::int64_t monday = tick * 7 - 3;
    const std::int64_t thursday = monday + 3;
    const Civil c = civil_from_days(thursday);
    const std::int64_t jan1 = days_from_civil(c.year, 1, 1);
    return {c.year, (thursday - jan1) / 7 + 1};
}

inline TimePoint from_wall_clock(Granularity g, std::int64_t local_ms, std::string_view zone) {
    if (is_sub_day(g)) {
        const std::int64_t utc = local_ms - zone_offset_ms(zone);
        return TimePoint{floor_div(utc, unit_ms(g)), g, std::string(zone), {}};
    }
    return TimePoint{tick_of_day(g, floor_div(local_ms, ms_per_day)), g, {}, {}};
}

} // namespace detail

/// Canonical rendering: "2011", "2011 Q3", "2011-07", "2011 W07",
/// "2011-07-05", "2011-07-05 17:00" (hour), "2011-07-05 17:45" (minute),
/// "2011-07-05 17:45:00", "2011-07-05 17:45:00.250"; ordinals as integers.
inline std::string format_time(const TimePoint& t) {
    using detail::pad;
    if (!t.kind.empty()) {
        if (auto a = find_index_adapter(t.kind))
            return a->format(t.ticks);
        throw schema_error("no index adapter registered for kind '" + t.kind + "'");
    }
    switch (t.granularity) {
    case Granularity::ordinal:
        return std::to_string(t.ticks);
    case Granularity::year:
        return pad(1970 + t.ticks, 4);
    case Granularity::quarter:
        return pad(1970 + detail::floor_div(t.ticks, 4), 4) + " Q" +
               std::to_string(detail::floor_mod(t.ticks, 4) + 1);
    case Granularity::month:
        return pad(1970 + detail::floor_div(t.ticks, 12), 4) + "-" +
               pad(detail::floor_mod(t.ticks, 12) + 1, 2);
    case Granularity::week: {
        const auto w = detail::iso_week_of_tick(t.ticks);
        return pad(w.year, 4) + " W" + pad(w.week, 2);
    }
    default:
        break;
    }
    const std::int64_t ms = detail::local_start_ms(t);
    const std::int64_t days = detail::floor_div(ms, detail::ms_per_day);
    const auto c = detail::civil_from_days(days);
    std::string out = pad(c.year, 4) + "-" + pad(c.month, 2) + "-" + pad(c.day, 2);
    if (t.granularity == Granularity::day)
        return out;
    const std::int64_t of_day = detail::floor_mod(ms, detail::ms_per_day);
    out += " " + pad(of_day / 3'600'000, 2) + ":" + pad(of_day / 60'000 % 60, 2);
    if (t.granularity == Granularity::hour || t.granularity == Granularity::minute)
        return out;
    out += ":" + pad(of_day / 1000 % 60, 2);
    if (t.granularity == Granularity::millisecond)
        out += "." + pad(of_day % 1000, 3);
    return out;
}

/// Parses the canonical forms, detecting the granularity from the shape of
/// the text. Bare integers are years when they have four digits and
/// ordinals otherwise. Returns std::nullopt when nothing matches.
inline std::optional<TimePoint> detect_time(std::string_view text, std::string_view zone = {}) {
    detail::Scanner sc{text};
    const bool negative = sc.eat('-');
    const std::size_t digit_start = sc.pos;
    auto first = sc.digits(1, 18);
    if (!first)
        return std::nullopt;
    const std::size_t ndigits = sc.pos - digit_start;
    if (sc.done()) {
        if (!negative && ndigits == 4)
            return make_time(Granularity::year, *first - 1970);
        return make_time(Granularity::ordinal, negative ? -*first : *first);
    }
    if (negative || ndigits != 4)
        return std::nullopt;
    const std::int64_t year = *first;

    if (sc.eat(' ')) {
        if (sc.eat('Q')) {
            auto q = sc.digits(1, 1);
            if (!q || *q < 1 || *q > 4 || !sc.done())
                return std::nullopt;
            return make_time(Granularity::quarter, (year - 1970) * 4 + (*q - 1));
        }
        if (sc.eat('W')) {
            auto w = sc.digits(1, 2);
            if (!w || *w < 1 || *w > 53 || !sc.done())
                return std::nullopt;
            auto tick = detail::iso_week_tick(year, *w);
            if (detail::iso_week_of_tick(tick).week != *w)
                return std::nullopt;
            return make_time(Granularity::week, tick);
        }
        auto m = sc.month_name();
        if (!m || !sc.done())
            return std::nullopt;
        return make_time(Granularity::month, (year - 1970) * 12 + (*m - 1));
    }
    if (!sc.eat('-'))
        return std::nullopt;
    auto month = sc.digits(2, 2);
    if (!month || *month < 1 || *month > 12)
        return std::nullopt;
    if (sc.done())
        return make_time(Granularity::month, (year - 1970) * 12 + (*month - 1));
    if (!sc.eat('-'))
        return std::nullopt;
    auto day = sc.digits(2, 2);
    if (!day)
        return std::nullopt;
    std::int64_t days = 0;
    try {
        days = detail::days_from_civil(int(year), unsigned(*month), unsigned(*day));
    } catch (const parse_error&) {
        return std::nullopt;
    }
    if (sc.done())
        return make_time(Granularity::day, days);
    if (!sc.eat(' ') && !sc.eat('T'))
        return std::nullopt;
    auto hh = sc.digits(2, 2);
    if (!hh || *hh > 23 || !sc.eat(':'))
        return std::nullopt;
    auto mi = sc.digits(2, 2);
    if (!mi || *mi > 59)
        return std::nullopt;
    std::int64_t ms = days * detail::ms_per_day + *hh * 3'600'000 + *mi * 60'000;
    Granularity g = Granularity::minute;
    if (sc.eat(':')) {
        auto ss = sc.digits(2, 2);
        if (!ss || *ss > 59)
            return std::nullopt;
        ms += *ss * 1000;
        g = Granularity::second;
        if (sc.eat('.')) {
            auto frac = sc.digits(3, 3);
            if (!frac)
                return std::nullopt;
            ms += *frac;
            g = Granularity::millisecond;
        }
    }
    if (sc.eat('Z') && !sc.done())
        return std::nullopt;
    if (!sc.done())
        return std::nullopt;
    return detail::from_wall_clock(g, ms, zone.empty() ? std::string_view{"UTC"} : zone);
}

/// Parses canonical text and coerces it to granularity `g`. Coarser text
/// than `g` (e.g. "2011-07" for a day index) is rejected; finer text must
/// sit exactly on a `g` boundary.
inline TimePoint parse_time(std::string_view text, Granularity g, std::string_view zone = {}) {
    auto t = detect_time(text, zone);
    if (!t)
        throw parse_error("cannot parse '" + std::string(text) + "' as a time value");
    if (t->granularity == g)
        return *t;
    if (g == Granularity::ordinal || t->granularity == Granularity::ordinal) {
        if (t->granularity == Granularity::year && g == Granularity::ordinal)
            return make_time(Granularity::ordinal, t->ticks + 1970);
        if (t->granularity == Granularity::ordinal && g == Granularity::year)
            return make_time(Granularity::year, t->ticks - 1970);
        throw parse_error("'" + std::string(text) + "' is not a " + std::string(to_string(g)) + " value");
    }
    if (coarseness(t->granularity) > coarseness(g))
        throw parse_error("'" + std::string(text) + "' is coarser than " + std::string(to_string(g)));
    const std::int64_t ms = detail::local_start_ms(*t);
    TimePoint out = detail::from_wall_clock(g, ms, zone.empty() ? std::string_view{"UTC"} : zone);
    if (detail::local_start_ms(out) != ms)
        throw parse_error("'" + std::string(text) + "' does not start a " + std::string(to_string(g)));
    return out;
}

/// strptime-style parsing. Supported fields: %Y %q (quarter 1-4) %m %b
/// (month abbreviation) %W (ISO week, paired with %Y as ISO week-year) %d
/// %H %M %S %f (milliseconds) and %%. The finest field decides the
/// granularity.
inline TimePoint parse_time_pattern(std::string_view text, std::string_view pattern,
                                    std::string_view zone = {}) {
    detail::Scanner sc{text};
    std::int64_t year = 1970, quarter = 0, month = 1, week = 0, day = 1, hour = 0, minute = 0,
                 second = 0, milli = 0;
    int finest = 9;
    bool has_week = false, has_quarter = false;
    auto fail = [&]() -> parse_error {
        return parse_error("'" + std::string(text) + "' does not match pattern '" + std::string(pattern) + "'");
    };
    auto need = [&](std::optional<std::int64_t> v) {
        if (!v)
            throw fail();
        return *v;
    };
    for (std::size_t i = 0; i < pattern.size(); ++i) {
        const char c = pattern[i];
        if (c != '%' || i + 1 == pattern.size()) {
            if (!sc.eat(c))
                throw fail();
            continue;
        }
        switch (pattern[++i]) {
        case 'Y': year = need(sc.digits(4, 4)); finest = std::min(finest, 8); break;
        case 'q': quarter = need(sc.digits(1, 1)); has_quarter = true; finest = std::min(finest, 7); break;
        case 'm': month = need(sc.digits(1, 2)); finest = std::min(finest, 6); break;
        case 'b': {
            auto m = sc.month_name();
            if (!m)
                throw fail();
            month = *m;
            finest = std::min(finest, 6);
            break;
        }
        case 'W': week = need(sc.digits(1, 2)); has_week = true; finest = std::min(finest, 5); break;
        case 'd': day = need(sc.digits(1, 2)); finest = std::min(finest, 4); break;
        case 'H': hour = need(sc.digits(1, 2)); finest = std::min(finest, 3); break;
        case 'M': minute = need(sc.digits(1, 2)); finest = std::min(finest, 2); break;
        case 'S': second = need(sc.digits(1, 2)); finest = std::min(finest, 1); break;
        case 'f': milli = need(sc.digits(3, 3)); finest = std::min(finest, 0); break;
        case '%':
            if (!sc.eat('%'))
                throw fail();
            break;
        default:
            throw parse_error("unsupported time pattern field '%" + std::string(1, pattern[i]) + "'");
        }
    }
    if (!sc.done() || finest == 9)
        throw fail();
    if (has_quarter && (quarter < 1 || quarter > 4))
        throw fail();
    if (month < 1 || month > 12 || hour > 23 || minute > 59 || second > 59)
        throw fail();
    if (has_week) {
        if (week < 1 || week > 53)
            throw fail();
        auto tick = detail::iso_week_tick(year, week);
        if (detail::iso_week_of_tick(tick).week != week)
            throw fail();
        return make_time(Granularity::week, tick);
    }
    if (has_quarter)
        month = (quarter - 1) * 3 + 1;
    constexpr std::array<Granularity, 9> by_rank{
        Granularity::millisecond, Granularity::second, Granularity::minute,
        Granularity::hour,        Granularity::day,    Granularity::week,
        Granularity::month,       Granularity::quarter, Granularity::year};
    const Granularity g = by_rank[std::size_t(finest)];
    const std::int64_t days = detail::days_from_civil(int(year), unsigned(month), unsigned(day));
    const std::int64_t ms = days * detail::ms_per_day + hour * 3'600'000 + minute * 60'000 + second * 1000 + milli;
    return detail::from_wall_clock(g, ms, zone.empty() ? std::string_view{"UTC"} : zone);
}

/// The period at granularity `g` containing `t`. Day-and-coarser targets
/// floor on the local calendar; sub-day targets floor the UTC tick count.
inline TimePoint floor_to(const TimePoint& t, Granularity g) {
    if (!t.kind.empty() || !is_calendar(t.granularity) || !is_calendar(g)) {
        if (t.kind.empty() && t.granularity == g)
            return t;
        throw unsupported_error("cannot convert a " +
                                (t.kind.empty() ? std::string(to_string(t.granularity)) : t.kind) +
                                " value to " + std::string(to_string(g)));
    }
    if (t.granularity == g)
        return t;
    if (!coarser_or_equal(g, t.granularity))
        throw precondition_error("cannot floor " + std::string(to_string(t.granularity)) + " to finer " +
                                 std::string(to_string(g)));
    if (is_sub_day(g)) {
        const std::int64_t ms = t.ticks * unit_ms(t.granularity);
        return TimePoint{detail::floor_div(ms, unit_ms(g)), g, t.zone, {}};
    }
    const std::int64_t days = detail::floor_div(detail::local_start_ms(t), detail::ms_per_day);
    return make_time(g, detail::tick_of_day(g, days));
}

/// Half-open wall-clock span [start, end) in milliseconds covered by `t`.
inline std::pair<std::int64_t, std::int64_t> wall_clock_span(const TimePoint& t) {
    if (!is_calendar(t.granularity))
        throw unsupported_error("ordinal values have no calendar span");
    TimePoint next = t;
    ++next.ticks;
    return {detail::local_start_ms(t), detail::local_start_ms(next)};
}

} // namespace tempus
