#pragma once

#include <algorithm>
#include <cmath>
#include <charconv>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tempus/error.hpp"
#include "tempus/table.hpp"

namespace tempus {

enum class AggFn : std::uint8_t { sum, mean, min, max, count, quantile };

/// An aggregation function from the fixed vocabulary; `p` is only used by
/// quantile.
struct Aggregator {
    AggFn fn = AggFn::sum;
    double p = 0.5;

    friend bool operator==(const Aggregator&, const Aggregator&) = default;
};

/// "sum", "mean", "min", "max", "count", "quantile:0.95".
inline Aggregator parse_aggregator(std::string_view s) {
    if (s == "sum") return {AggFn::sum};
    if (s == "mean") return {AggFn::mean};
    if (s == "min") return {AggFn::min};
    if (s == "max") return {AggFn::max};
    if (s == "count") return {AggFn::count};
    if (s.starts_with("quantile:")) {
        const auto num = s.substr(9);
        double p = -1;
        auto res = std::from_chars(num.data(), num.data() + num.size(), p);
        if (res.ec != std::errc{} || res.ptr != num.data() + num.size() || !(p >= 0 && p <= 1))
            throw precondition_error("quantile probability must be in [0, 1], got '" + std::string(num) + "'");
        return {AggFn::quantile, p};
    }
    throw precondition_error("unknown aggregation '" + std::string(s) +
                             "' (expected sum, mean, min, max, count or quantile:p)");
}

/// Suffix used when naming output columns: sum, mean, ..., q50, q95.
inline std::string aggregator_label(const Aggregator& a) {
    switch (a.fn) {
    case AggFn::sum: return "sum";
    case AggFn::mean: return "mean";
    case AggFn::min: return "min";
    case AggFn::max: return "max";
    case AggFn::count: return "count";
    case AggFn::quantile: {
        char buf[32];
        auto res = std::to_chars(buf, buf + sizeof buf, a.p * 100);
        return "q" + std::string(buf, res.ptr);
    }
    }
    return "?";
}

/// Linear interpolation between order statistics (sample quantile type 7).
/// `sorted` must be ascending and non-empty.
inline double quantile_sorted(std::span<const double> sorted, double p) {
    const double h = (double(sorted.size()) - 1) * p;
    const auto lo = std::size_t(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - double(lo)) * (sorted[hi] - sorted[lo]);
}

/// Kind an aggregation yields for an input column of kind `in`.
inline CellKind aggregate_kind(CellKind in, const Aggregator& a) {
    const bool numeric = in == CellKind::integer || in == CellKind::real || in == CellKind::boolean ||
                         in == CellKind::missing;
    switch (a.fn) {
    case AggFn::count: return CellKind::integer;
    case AggFn::sum:
        if (!numeric)
            break;
        return in == CellKind::real ? CellKind::real : CellKind::integer;
    case AggFn::mean:
    case AggFn::quantile:
        if (!numeric)
            break;
        return CellKind::real;
    case AggFn::min:
    case AggFn::max: return in;
    }
    throw schema_error("cannot " + aggregator_label(a) + " " + std::string(to_string(in)) + " values");
}

/// Reduces cells to one value, skipping missing cells. Sum of nothing is
/// zero; mean, min, max and quantile of nothing are missing. `column_kind`
/// fixes the result kind when every cell is missing.
inline Cell aggregate(std::span<const Cell> cells, const Aggregator& a, CellKind column_kind = CellKind::missing) {
    CellKind in = column_kind;
    for (const auto& c : cells)
        if (!c.is_missing()) {
            if (in != CellKind::missing && in != c.kind())
                throw schema_error("cannot aggregate a mix of " + std::string(to_string(in)) + " and " +
                                   std::string(to_string(c.kind())) + " values");
            in = c.kind();
            break;
        }
    const CellKind out = aggregate_kind(in, a);

    std::size_t present = 0;
    for (const auto& c : cells)
        present += !c.is_missing();

    switch (a.fn) {
    case AggFn::count: return Cell(std::int64_t(present));
    case AggFn::sum: {
        if (out == CellKind::integer) {
            std::int64_t s = 0;
            for (const auto& c : cells) {
                if (auto i = c.get_if<std::int64_t>()) s += *i;
                else if (auto b = c.get_if<bool>()) s += *b;
            }
            return Cell(s);
        }
        double s = 0;
        for (const auto& c : cells)
            if (auto d = c.get_if<double>()) s += *d;
        return Cell(s);
    }
    case AggFn::min:
    case AggFn::max: {
        const Cell* best = nullptr;
        for (const auto& c : cells) {
            if (c.is_missing())
                continue;
            if (!best || (a.fn == AggFn::min ? compare_cells(c, *best) < 0 : compare_cells(c, *best) > 0))
                best = &c;
        }
        return best ? *best : Cell::missing();
    }
    case AggFn::mean:
    case AggFn::quantile: {
        if (present == 0)
            return Cell::missing();
        std::vector<double> xs;
        xs.reserve(present);
        for (const auto& c : cells) {
            if (auto v = c.number()) xs.push_back(*v);
            else if (auto b = c.get_if<bool>()) xs.push_back(*b ? 1.0 : 0.0);
        }
        if (a.fn == AggFn::mean) {
            double s = 0;
            for (double x : xs) s += x;
            return Cell(s / double(xs.size()));
        }
        std::sort(xs.begin(), xs.end());
        return Cell(quantile_sorted(xs, a.p));
    }
    }
    return Cell::missing();
}

/// Same vocabulary over plain doubles (NaN treated as missing); used by the
/// rolling functions.
inline double aggregate_doubles(std::span<const double> xs, const Aggregator& a) {
    std::vector<double> v;
    v.reserve(xs.size());
    for (double x : xs)
        if (!std::isnan(x)) v.push_back(x);
    switch (a.fn) {
    case AggFn::count: return double(v.size());
    case AggFn::sum: {
        double s = 0;
        for (double x : v) s += x;
        return s;
    }
    default: break;
    }
    if (v.empty())
        return std::nan("");
    switch (a.fn) {
    case AggFn::mean: {
        double s = 0;
        for (double x : v) s += x;
        return s / double(v.size());
    }
    case AggFn::min: return *std::min_element(v.begin(), v.end());
    case AggFn::max: return *std::max_element(v.begin(), v.end());
    case AggFn::quantile:
        std::sort(v.begin(), v.end());
        return quantile_sorted(v, a.p);
    default: break;
    }
    return std::nan("");
}

} // namespace tempus
