#pragma once

#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "tempus/error.hpp"
#include "tempus/time.hpp"

namespace tempus {

/// Spacing of a temporal table: regular (unit x multiple), irregular
/// (declared by the user), or unknown (not enough observations to tell).
class Interval {
public:
    enum class Form : std::uint8_t { regular, irregular, unknown };

    static Interval regular(Granularity unit, std::int64_t multiple, std::string kind = {}) {
        if (multiple < 1)
            throw precondition_error("regular interval multiple must be >= 1");
        return Interval(Form::regular, unit, multiple, std::move(kind));
    }
    static Interval irregular() { return Interval(Form::irregular, Granularity::ordinal, 0, {}); }
    static Interval unknown() { return Interval(Form::unknown, Granularity::ordinal, 0, {}); }

    Form form() const noexcept { return form_; }
    bool is_regular() const noexcept { return form_ == Form::regular; }
    Granularity unit() const noexcept { return unit_; }
    std::int64_t multiple() const noexcept { return multiple_; }
    const std::string& kind() const noexcept { return kind_; }

    friend bool operator==(const Interval&, const Interval&) = default;

private:
    Interval(Form f, Granularity u, std::int64_t m, std::string k)
        : form_(f), unit_(u), multiple_(m), kind_(std::move(k)) {}

    Form form_;
    Granularity unit_;
    std::int64_t multiple_;
    std::string kind_;
};

/// Shorthand like "[1Y]", "[15m]", "[!]", "[?]". Sub-second to hour
/// multiples are shown in the largest unit that divides them exactly, so
/// Regular(second, 3600) prints as "[1h]".
inline std::string to_string(const Interval& iv) {
    switch (iv.form()) {
    case Interval::Form::irregular: return "[!]";
    case Interval::Form::unknown: return "[?]";
    case Interval::Form::regular: break;
    }
    if (!iv.kind().empty()) {
        auto a = find_index_adapter(iv.kind());
        return "[" + std::to_string(iv.multiple()) + (a ? a->unit_letter : iv.kind()) + "]";
    }
    Granularity unit = iv.unit();
    std::int64_t m = iv.multiple();
    if (is_sub_day(unit)) {
        const std::int64_t ms = m * unit_ms(unit);
        for (auto g : {Granularity::hour, Granularity::minute, Granularity::second, Granularity::millisecond}) {
            if (ms % unit_ms(g) == 0) {
                unit = g;
                m = ms / unit_ms(g);
                break;
            }
        }
    }
    return "[" + std::to_string(m) + std::string(unit_letter(unit)) + "]";
}

inline std::int64_t gcd_of_diffs(std::span<const std::int64_t> diffs) {
    if (diffs.empty())
        throw precondition_error("gcd_of_diffs needs at least one difference");
    std::int64_t g = 0;
    for (auto d : diffs) {
        if (d <= 0)
            throw precondition_error("gcd_of_diffs needs positive differences");
        g = std::gcd(g, d);
    }
    return g;
}

/// Pools consecutive within-key differences across all keys and takes
/// their GCD. Each inner list must be sorted ascending with distinct
/// values.
inline Interval infer_interval(std::span<const std::vector<TimePoint>> per_key, bool declared_regular) {
    const TimePoint* first = nullptr;
    for (const auto& series : per_key) {
        for (const auto& t : series) {
            if (!first)
                first = &t;
            else if (!t.comparable_with(*first))
                throw schema_error("index mixes " + std::string(to_string(first->granularity)) + " and " +
                                   std::string(to_string(t.granularity)) + " values");
        }
    }
    if (!declared_regular)
        return Interval::irregular();

    std::int64_t g = 0;
    for (const auto& series : per_key) {
        for (std::size_t i = 1; i < series.size(); ++i) {
            const std::int64_t d = series[i].ticks - series[i - 1].ticks;
            if (d <= 0)
                throw precondition_error("index values must be strictly increasing within a key");
            g = std::gcd(g, d);
        }
    }
    if (g == 0)
        return Interval::unknown();
    return Interval::regular(first->granularity, g, first->kind);
}

} // namespace tempus
