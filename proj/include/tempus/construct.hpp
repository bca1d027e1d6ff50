#pragma once

#include <algorithm>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "tempus/error.hpp"
#include "tempus/interval.hpp"
#include "tempus/table.hpp"

namespace tempus {

/// Rows that share a (key, index) pair with at least one other row, in
/// source order. `positions` are 0-based row ordinals in the source table.
struct DuplicateReport {
    Table rows;
    std::vector<std::size_t> positions;

    bool empty() const noexcept { return positions.empty(); }
    std::size_t size() const noexcept { return positions.size(); }
};

class construction_error : public validity_error {
public:
    construction_error(const std::string& what, DuplicateReport report)
        : validity_error(what), report_(std::move(report)) {}
    const char* category() const noexcept override { return "construction"; }
    const DuplicateReport& report() const noexcept { return report_; }

private:
    DuplicateReport report_;
};

/// Index grouping attached by index_by: either a calendar granularity or a
/// caller-supplied monotone mapping.
struct IndexGrouping {
    std::string name;  ///< name of the derived index column produced by summarize
    std::optional<Granularity> unit;
    std::function<TimePoint(const TimePoint&)> mapping;

    TimePoint apply(const TimePoint& t) const { return unit ? floor_to(t, *unit) : mapping(t); }
};

struct Grouping {
    std::vector<std::string> columns;
    std::optional<IndexGrouping> index;
};

class TemporalTable;

namespace detail {
struct TemporalAccess;
}

/// A table with a time index, an identifying key and an inferred interval.
/// (key, index) pairs are unique and rows are ordered by key then index
/// unless `order_dirty()` is set by a reordering verb.
class TemporalTable {
public:
    const Table& data() const noexcept { return data_; }
    const std::string& index() const noexcept { return index_; }
    const std::vector<std::string>& key() const noexcept { return key_; }
    const Interval& interval() const noexcept { return interval_; }
    bool declared_regular() const noexcept { return regular_; }
    const std::optional<Grouping>& grouping() const noexcept { return grouping_; }
    bool order_dirty() const noexcept { return order_dirty_; }

    std::size_t rows() const noexcept { return data_.rows(); }
    std::size_t cols() const noexcept { return data_.cols(); }
    const Column& column(std::string_view name) const { return data_.column(name); }
    const Column& index_column() const { return data_.column(index_); }

    /// Granularity of the index (ordinal for adapter kinds and empty tables).
    Granularity index_granularity() const {
        for (const auto& c : index_column().cells())
            if (auto t = c.get_if<TimePoint>())
                return t->granularity;
        return interval_.is_regular() ? interval_.unit() : Granularity::ordinal;
    }

    /// Zone label of the index when it holds date-times, empty otherwise.
    std::string index_zone() const {
        for (const auto& c : index_column().cells())
            if (auto t = c.get_if<TimePoint>())
                return is_sub_day(t->granularity) ? t->zone : std::string{};
        return {};
    }

    friend bool operator==(const TemporalTable& a, const TemporalTable& b) {
        return a.data_ == b.data_ && a.index_ == b.index_ && a.key_ == b.key_ && a.interval_ == b.interval_ &&
               a.order_dirty_ == b.order_dirty_;
    }

private:
    friend struct detail::TemporalAccess;
    TemporalTable() = default;

    Table data_;
    std::string index_;
    std::vector<std::string> key_;
    Interval interval_ = Interval::unknown();
    bool regular_ = true;
    std::optional<Grouping> grouping_;
    bool order_dirty_ = false;
};

namespace detail {

struct TemporalAccess {
    static TemporalTable make(Table data, std::string index, std::vector<std::string> key, Interval interval,
                              bool regular) {
        TemporalTable t;
        t.data_ = std::move(data);
        t.index_ = std::move(index);
        t.key_ = std::move(key);
        t.interval_ = std::move(interval);
        t.regular_ = regular;
        return t;
    }
    static std::optional<Grouping>& grouping(TemporalTable& t) { return t.grouping_; }
    static bool& order_dirty(TemporalTable& t) { return t.order_dirty_; }
    static Table& data(TemporalTable& t) { return t.data_; }
};

struct Layout {
    std::size_t index;
    std::vector<std::size_t> key;
};

inline Layout check_layout(const Table& raw, const std::string& index, const std::vector<std::string>& key) {
    Layout l{raw.position(index), raw.positions(key)};
    for (std::size_t i = 0; i < key.size(); ++i) {
        if (key[i] == index)
            throw schema_error("index column '" + index + "' cannot also be a key column");
        for (std::size_t j = 0; j < i; ++j)
            if (key[j] == key[i])
                throw schema_error("key column '" + key[i] + "' listed twice");
    }
    const Column& idx = raw.column(l.index);
    if (idx.kind() != CellKind::time && idx.kind() != CellKind::missing)
        throw schema_error("index column '" + index + "' holds " + std::string(to_string(idx.kind())) +
                           " values, not time values");
    return l;
}

/// Row order by (key tuple, index), stable.
inline std::vector<std::size_t> canonical_order(const Table& raw, const Layout& l) {
    std::vector<std::size_t> order(raw.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const Column& idx = raw.column(l.index);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        for (auto k : l.key) {
            const Column& c = raw.column(k);
            if (int r = compare_cells(c[a], c[b]))
                return r < 0;
        }
        return compare_cells(idx[a], idx[b]) < 0;
    });
    return order;
}

inline bool same_key_and_index(const Table& t, const Layout& l, std::size_t a, std::size_t b) {
    for (auto k : l.key)
        if (compare_cells(t.column(k)[a], t.column(k)[b]) != 0)
            return false;
    return compare_cells(t.column(l.index)[a], t.column(l.index)[b]) == 0;
}

inline DuplicateReport duplicates_in_order(const Table& raw, const Layout& l, const std::vector<std::size_t>& order) {
    std::vector<bool> dup(raw.rows(), false);
    for (std::size_t i = 1; i < order.size(); ++i) {
        if (same_key_and_index(raw, l, order[i - 1], order[i])) {
            dup[order[i - 1]] = true;
            dup[order[i]] = true;
        }
    }
    DuplicateReport rep;
    for (std::size_t r = 0; r < raw.rows(); ++r)
        if (dup[r])
            rep.positions.push_back(r);
    rep.rows = raw.take(rep.positions);
    return rep;
}

/// Per-key index lists of a table already in canonical order.
inline std::vector<std::vector<TimePoint>> index_runs(const Table& sorted, const Layout& l) {
    std::vector<std::vector<TimePoint>> runs;
    const Column& idx = sorted.column(l.index);
    for (std::size_t r = 0; r < sorted.rows(); ++r) {
        bool new_key = r == 0;
        for (auto k : l.key) {
            if (new_key)
                break;
            new_key = compare_cells(sorted.column(k)[r - 1], sorted.column(k)[r]) != 0;
        }
        if (new_key)
            runs.emplace_back();
        runs.back().push_back(idx[r].as<TimePoint>());
    }
    return runs;
}

inline std::string describe_row(const Table& t, const Layout& l, std::size_t r) {
    std::string s = "(";
    for (auto k : l.key)
        s += to_text(t.column(k)[r]) + ", ";
    return s + to_text(t.column(l.index)[r]) + ")";
}

} // namespace detail

/// All rows taking part in a duplicated (key, index) pair, in source order.
inline DuplicateReport duplicates(const Table& raw, const std::string& index, const std::vector<std::string>& key) {
    const auto layout = detail::check_layout(raw, index, key);
    return detail::duplicates_in_order(raw, layout, detail::canonical_order(raw, layout));
}

/// Validates and sorts `raw` into a temporal table. Refuses duplicated
/// (key, index) pairs with a construction_error carrying the offending rows;
/// never resolves them.
inline TemporalTable build(const Table& raw, const std::string& index, const std::vector<std::string>& key,
                           bool regular = true) {
    const auto layout = detail::check_layout(raw, index, key);
    const Column& idx = raw.column(layout.index);
    for (std::size_t r = 0; r < raw.rows(); ++r) {
        if (idx[r].is_missing())
            throw construction_error("index column '" + index + "' has a missing value at row " + std::to_string(r + 1),
                                     {});
    }
    const auto order = detail::canonical_order(raw, layout);
    auto report = detail::duplicates_in_order(raw, layout, order);
    if (!report.empty()) {
        const std::string message = std::to_string(report.size()) + " rows share a (key, index) pair, first " +
                                    detail::describe_row(raw, layout, report.positions.front()) +
                                    "; the key and index must identify each row";
        throw construction_error(message, std::move(report));
    }
    Table sorted = raw.take(order);
    const auto runs = detail::index_runs(sorted, layout);
    Interval iv = infer_interval(runs, regular);
    return detail::TemporalAccess::make(std::move(sorted), index, key, std::move(iv), regular);
}

/// Re-sorts an order-dirty table into (key, index) order; no-op otherwise.
inline TemporalTable restore_order(const TemporalTable& t) {
    if (!t.order_dirty())
        return t;
    const auto layout = detail::check_layout(t.data(), t.index(), t.key());
    TemporalTable out = detail::TemporalAccess::make(t.data().take(detail::canonical_order(t.data(), layout)), t.index(),
                                                     t.key(), t.interval(), t.declared_regular());
    detail::TemporalAccess::grouping(out) = t.grouping();
    return out;
}

struct KeyGroup {
    KeyTuple key;
    std::size_t begin;
    std::size_t end;

    std::size_t size() const noexcept { return end - begin; }
};

/// One entry per distinct key tuple with its contiguous row range. Requires
/// canonical order (call restore_order after arrange).
inline std::vector<KeyGroup> key_groups(const TemporalTable& t) {
    if (t.order_dirty())
        throw precondition_error("key_groups needs (key, index) order; call restore_order first");
    const Table& d = t.data();
    const auto cols = d.positions(t.key());
    std::vector<KeyGroup> out;
    for (std::size_t r = 0; r < d.rows(); ++r) {
        KeyTuple k = d.tuple(cols, r);
        if (out.empty() || compare_tuples(out.back().key, k) != 0)
            out.push_back({std::move(k), r, r});
        out.back().end = r + 1;
    }
    return out;
}

/// Number of distinct key tuples; works on any row order.
inline std::size_t count_keys(const TemporalTable& t) {
    if (!t.order_dirty())
        return key_groups(t).size();
    const auto cols = t.data().positions(t.key());
    std::unordered_set<KeyTuple, KeyTupleHash> seen;
    for (std::size_t r = 0; r < t.rows(); ++r)
        seen.insert(t.data().tuple(cols, r));
    return seen.size();
}

/// Notes worth surfacing after construction (all-missing key columns).
inline std::vector<std::string> construction_notes(const TemporalTable& t) {
    std::vector<std::string> notes;
    for (const auto& k : t.key()) {
        const auto& c = t.column(k);
        if (c.size() > 0 && c.kind() == CellKind::missing)
            notes.push_back("key column '" + k + "' is entirely missing and forms a single key level");
    }
    return notes;
}

/// Full invariant check: layout, order, uniqueness, interval consistency.
/// Returns a description of the first violation, or std::nullopt.
inline std::optional<std::string> check_invariants(const TemporalTable& t) {
    try {
        const auto layout = detail::check_layout(t.data(), t.index(), t.key());
        const TemporalTable* view = &t;
        std::optional<TemporalTable> sorted_copy;
        if (t.order_dirty()) {
            sorted_copy.emplace(restore_order(t));
            view = &*sorted_copy;
        }
        const Table& s = view->data();
        for (std::size_t r = 0; r < s.rows(); ++r) {
            if (s.column(layout.index)[r].is_missing())
                return "missing index value at row " + std::to_string(r);
            if (r == 0)
                continue;
            int c = 0;
            for (auto k : layout.key)
                if ((c = compare_cells(s.column(k)[r - 1], s.column(k)[r])) != 0)
                    break;
            if (c > 0)
                return "key tuples decrease at row " + std::to_string(r);
            if (c == 0 && compare_cells(s.column(layout.index)[r - 1], s.column(layout.index)[r]) >= 0)
                return "index not strictly increasing within key at row " + std::to_string(r);
        }
        const auto runs = detail::index_runs(s, layout);
        const Interval expect = infer_interval(runs, t.declared_regular());
        if (!(expect == t.interval()))
            return "interval " + to_string(t.interval()) + " differs from inferred " + to_string(expect);
    } catch (const error& e) {
        return std::string("invariant check failed: ") + e.what();
    }
    return std::nullopt;
}

} // namespace tempus
