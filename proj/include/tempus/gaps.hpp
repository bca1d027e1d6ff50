#pragma once

#include <map>
#include <string>
#include <vector>

#include "tempus/aggregate.hpp"
#include "tempus/construct.hpp"

namespace tempus {

struct GapRange {
    TimePoint from;
    TimePoint to;
    std::int64_t n;  ///< interval steps in [from, to]
};

struct KeyGaps {
    KeyTuple key;
    std::vector<GapRange> ranges;
};

/// Maximal runs of implicit missing index values, per key. Keys without
/// gaps are omitted.
struct GapReport {
    std::vector<std::string> key_names;
    std::vector<KeyGaps> keys;

    bool empty() const noexcept { return keys.empty(); }

    std::int64_t total() const noexcept {
        std::int64_t n = 0;
        for (const auto& k : keys)
            for (const auto& r : k.ranges)
                n += r.n;
        return n;
    }

    /// Columns: key..., from, to, n.
    Table to_table() const {
        std::vector<Column> cols;
        for (const auto& k : key_names)
            cols.emplace_back(k);
        Column from("from"), to("to"), n("n");
        for (const auto& k : keys) {
            for (const auto& r : k.ranges) {
                for (std::size_t i = 0; i < key_names.size(); ++i)
                    cols[i].push_back(k.key[i]);
                from.push_back(r.from);
                to.push_back(r.to);
                n.push_back(r.n);
            }
        }
        cols.push_back(std::move(from));
        cols.push_back(std::move(to));
        cols.push_back(std::move(n));
        return Table(std::move(cols));
    }
};

namespace detail {

struct KeyScan {
    KeyTuple key;
    std::vector<std::int64_t> missing;  ///< ascending ticks
};

/// Walks each key's expected grid and collects absent ticks. With `full`,
/// the grid spans the global [min, max] of the index, anchored on the
/// key's own phase so keys stay aligned to their observed ticks.
inline std::vector<KeyScan> scan_keys(const TemporalTable& t, bool full, TimePoint& prototype) {
    if (!t.interval().is_regular())
        throw unsupported_error("gap verbs need a regular interval; this table's interval is " +
                                to_string(t.interval()) + " (regularize it first)");
    const std::int64_t m = t.interval().multiple();
    const auto groups = key_groups(t);
    const Column& idx = t.index_column();

    std::int64_t gmin = 0, gmax = 0;
    for (std::size_t r = 0; r < idx.size(); ++r) {
        const auto& tp = idx[r].as<TimePoint>();
        if (r == 0) {
            gmin = gmax = tp.ticks;
            prototype = tp;
        }
        gmin = std::min(gmin, tp.ticks);
        gmax = std::max(gmax, tp.ticks);
    }

    std::vector<KeyScan> out;
    out.reserve(groups.size());
    for (const auto& g : groups) {
        const std::int64_t first = idx[g.begin].as<TimePoint>().ticks;
        const std::int64_t last = idx[g.end - 1].as<TimePoint>().ticks;
        std::int64_t lo = first, hi = last;
        if (full) {
            lo = first - floor_div(first - gmin, m) * m;
            hi = first + floor_div(gmax - first, m) * m;
        }
        KeyScan ks{g.key, {}};
        std::size_t r = g.begin;
        for (std::int64_t tick = lo; tick <= hi; tick += m) {
            while (r < g.end && idx[r].as<TimePoint>().ticks < tick)
                ++r;
            if (r < g.end && idx[r].as<TimePoint>().ticks == tick)
                continue;
            ks.missing.push_back(tick);
        }
        out.push_back(std::move(ks));
    }
    return out;
}

inline TimePoint with_ticks(const TimePoint& proto, std::int64_t ticks) {
    TimePoint t = proto;
    t.ticks = ticks;
    return t;
}

} // namespace detail

/// Per key: true when the series is missing index values within its span
/// (per key) or within the table's full span (`full`). Columns: key...,
/// has_gaps.
inline Table has_gaps(const TemporalTable& input, bool full = false) {
    const TemporalTable t = restore_order(input);
    TimePoint proto;
    const auto scans = detail::scan_keys(t, full, proto);
    std::vector<Column> cols;
    for (const auto& k : t.key())
        cols.emplace_back(k);
    Column flag("has_gaps");
    for (const auto& s : scans) {
        for (std::size_t i = 0; i < s.key.size(); ++i)
            cols[i].push_back(s.key[i]);
        flag.push_back(!s.missing.empty());
    }
    cols.push_back(std::move(flag));
    return Table(std::move(cols));
}

/// One row per implicit missing (key, index). Columns: key..., index.
inline Table scan_gaps(const TemporalTable& input, bool full = false) {
    const TemporalTable t = restore_order(input);
    TimePoint proto;
    const auto scans = detail::scan_keys(t, full, proto);
    std::vector<Column> cols;
    for (const auto& k : t.key())
        cols.emplace_back(k);
    Column index(t.index());
    for (const auto& s : scans) {
        for (auto tick : s.missing) {
            for (std::size_t i = 0; i < s.key.size(); ++i)
                cols[i].push_back(s.key[i]);
            index.push_back(detail::with_ticks(proto, tick));
        }
    }
    cols.push_back(std::move(index));
    return Table(std::move(cols));
}

inline GapReport count_gaps(const TemporalTable& input, bool full = false) {
    const TemporalTable t = restore_order(input);
    TimePoint proto;
    const auto scans = detail::scan_keys(t, full, proto);
    const std::int64_t m = t.interval().multiple();
    GapReport rep{t.key(), {}};
    for (const auto& s : scans) {
        if (s.missing.empty())
            continue;
        KeyGaps kg{s.key, {}};
        std::size_t i = 0;
        while (i < s.missing.size()) {
            std::size_t j = i;
            while (j + 1 < s.missing.size() && s.missing[j + 1] == s.missing[j] + m)
                ++j;
            kg.ranges.push_back({detail::with_ticks(proto, s.missing[i]), detail::with_ticks(proto, s.missing[j]),
                                 std::int64_t(j - i + 1)});
            i = j + 1;
        }
        rep.keys.push_back(std::move(kg));
    }
    return rep;
}

/// How fill_gaps populates a measured column in the new rows.
struct FillPolicy {
    enum class Kind : std::uint8_t { missing, constant, aggregate };

    Kind kind = Kind::missing;
    Cell value;
    Aggregator aggregator;

    static FillPolicy missing() { return {}; }
    static FillPolicy constant(Cell v) { return {Kind::constant, std::move(v), {}}; }
    /// Per-key aggregate over the key's observed values.
    static FillPolicy per_key(Aggregator a) { return {Kind::aggregate, {}, a}; }
};

/// Makes implicit missing rows explicit. Existing rows are untouched; new
/// rows carry the key tuple and index, with measured columns set per
/// `fills` (missing by default).
inline TemporalTable fill_gaps(const TemporalTable& input, const std::map<std::string, FillPolicy>& fills = {},
                               bool full = false) {
    const TemporalTable t = restore_order(input);
    TimePoint proto;
    const auto scans = detail::scan_keys(t, full, proto);
    const auto groups = key_groups(t);
    const Table& d = t.data();

    for (const auto& [name, policy] : fills) {
        const auto& col = d.column(name);
        if (name == t.index() || std::find(t.key().begin(), t.key().end(), name) != t.key().end())
            throw schema_error("cannot fill key or index column '" + name + "'");
        if (policy.kind == FillPolicy::Kind::constant && !policy.value.is_missing() &&
            col.kind() != CellKind::missing && policy.value.kind() != col.kind())
            throw schema_error("fill value for '" + name + "' is " + std::string(to_string(policy.value.kind())) +
                               " but the column holds " + std::string(to_string(col.kind())));
        if (policy.kind == FillPolicy::Kind::aggregate && col.kind() != CellKind::missing &&
            aggregate_kind(col.kind(), policy.aggregator) != col.kind())
            throw schema_error("filling '" + name + "' with " + aggregator_label(policy.aggregator) + " yields " +
                               std::string(to_string(aggregate_kind(col.kind(), policy.aggregator))) +
                               " values in a " + std::string(to_string(col.kind())) + " column");
    }

    const auto key_pos = d.positions(t.key());
    const auto index_pos = d.position(t.index());
    std::vector<Column> cols;
    for (const auto& c : d.columns())
        cols.push_back(c);
    for (std::size_t g = 0; g < scans.size(); ++g) {
        if (scans[g].missing.empty())
            continue;
        std::vector<Cell> fill_values(d.cols());
        for (std::size_t c = 0; c < d.cols(); ++c) {
            auto it = fills.find(d.column(c).name());
            if (it == fills.end())
                continue;
            if (it->second.kind == FillPolicy::Kind::constant) {
                fill_values[c] = it->second.value;
            } else if (it->second.kind == FillPolicy::Kind::aggregate) {
                const auto& cells = d.column(c).cells();
                fill_values[c] = aggregate(std::span<const Cell>(cells.data() + groups[g].begin, groups[g].size()),
                                           it->second.aggregator, d.column(c).kind());
            }
        }
        for (std::size_t k = 0; k < key_pos.size(); ++k)
            fill_values[key_pos[k]] = scans[g].key[k];
        for (auto tick : scans[g].missing) {
            fill_values[index_pos] = detail::with_ticks(proto, tick);
            for (std::size_t c = 0; c < cols.size(); ++c)
                cols[c].push_back(fill_values[c]);
        }
    }
    TemporalTable out = build(Table(std::move(cols)), t.index(), t.key(), t.declared_regular());
    detail::TemporalAccess::grouping(out) = t.grouping();
    return out;
}

} // namespace tempus
