#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "tempus/aggregate.hpp"
#include "tempus/construct.hpp"

namespace tempus {

/// Result of a table verb: the (still valid) temporal table plus any
/// diagnostics the verb raised along the way.
struct VerbOutcome {
    TemporalTable table;
    std::vector<std::string> warnings;
};

enum class CompareOp : std::uint8_t { eq, ne, lt, le, gt, ge };

/// Row-wise expression with the list of columns it reads, so verbs can
/// reject unknown columns before evaluating anything.
class Expression {
public:
    Expression(std::function<Cell(const RowView&)> fn, std::vector<std::string> columns = {})
        : fn_(std::move(fn)), columns_(std::move(columns)) {}

    Cell operator()(const RowView& row) const { return fn_(row); }
    const std::vector<std::string>& columns() const noexcept { return columns_; }

private:
    std::function<Cell(const RowView&)> fn_;
    std::vector<std::string> columns_;
};

/// Boolean row test; a missing result counts as false.
class Predicate {
public:
    Predicate(std::function<bool(const RowView&)> fn, std::vector<std::string> columns = {})
        : fn_(std::move(fn)), columns_(std::move(columns)) {}

    bool operator()(const RowView& row) const { return fn_(row); }
    const std::vector<std::string>& columns() const noexcept { return columns_; }

    friend Predicate operator&&(Predicate a, Predicate b) {
        auto cols = a.columns_;
        cols.insert(cols.end(), b.columns_.begin(), b.columns_.end());
        return Predicate([a = std::move(a), b = std::move(b)](const RowView& r) { return a(r) && b(r); },
                         std::move(cols));
    }

private:
    std::function<bool(const RowView&)> fn_;
    std::vector<std::string> columns_;
};

namespace expr {

inline Expression col(std::string name) {
    return Expression([name](const RowView& r) { return r[name]; }, {name});
}

inline Expression lit(Cell value) {
    return Expression([value = std::move(value)](const RowView&) { return value; });
}

/// Compares numerically across integer/real; otherwise requires equal
/// kinds. Missing on either side yields missing.
inline std::optional<bool> compare(const Cell& a, const Cell& b, CompareOp op) {
    if (a.is_missing() || b.is_missing())
        return std::nullopt;
    int c = 0;
    auto x = a.number(), y = b.number();
    if (x && y) {
        c = *x < *y ? -1 : (*y < *x ? 1 : 0);
    } else if (a.kind() == b.kind()) {
        if (a.kind() == CellKind::time && !a.as<TimePoint>().comparable_with(b.as<TimePoint>()))
            throw schema_error("cannot compare time values of different granularity");
        c = compare_cells(a, b);
    } else {
        throw schema_error("cannot compare " + std::string(to_string(a.kind())) + " with " +
                           std::string(to_string(b.kind())));
    }
    switch (op) {
    case CompareOp::eq: return c == 0;
    case CompareOp::ne: return c != 0;
    case CompareOp::lt: return c < 0;
    case CompareOp::le: return c <= 0;
    case CompareOp::gt: return c > 0;
    case CompareOp::ge: return c >= 0;
    }
    return std::nullopt;
}

/// Boolean-valued expression `a op b` (missing when either side is).
inline Expression cmp(Expression a, CompareOp op, Expression b) {
    auto cols = a.columns();
    cols.insert(cols.end(), b.columns().begin(), b.columns().end());
    return Expression(
        [a = std::move(a), b = std::move(b), op](const RowView& r) -> Cell {
            auto v = compare(a(r), b(r), op);
            return v ? Cell(*v) : Cell::missing();
        },
        std::move(cols));
}

/// Arithmetic on numbers: '+', '-', '*', '/'. Integer op integer stays
/// integer except for division.
inline Expression arith(Expression a, char op, Expression b) {
    auto cols = a.columns();
    cols.insert(cols.end(), b.columns().begin(), b.columns().end());
    return Expression(
        [a = std::move(a), b = std::move(b), op](const RowView& r) -> Cell {
            const Cell x = a(r), y = b(r);
            if (x.is_missing() || y.is_missing())
                return Cell::missing();
            auto xi = x.get_if<std::int64_t>(), yi = y.get_if<std::int64_t>();
            if (xi && yi && op != '/') {
                switch (op) {
                case '+': return Cell(*xi + *yi);
                case '-': return Cell(*xi - *yi);
                case '*': return Cell(*xi * *yi);
                }
            }
            auto xd = x.number(), yd = y.number();
            if (!xd || !yd)
                throw schema_error("arithmetic needs numeric operands");
            switch (op) {
            case '+': return Cell(*xd + *yd);
            case '-': return Cell(*xd - *yd);
            case '*': return Cell(*xd * *yd);
            case '/': return Cell(*xd / *yd);
            }
            throw precondition_error(std::string("unknown arithmetic operator '") + op + "'");
        },
        std::move(cols));
}

} // namespace expr

/// `column op value`; missing cells never match.
inline Predicate where(std::string column, CompareOp op, Cell value) {
    return Predicate(
        [column, op, value = std::move(value)](const RowView& r) {
            return expr::compare(r[column], value, op).value_or(false);
        },
        {column});
}

inline Predicate where(const Expression& e) {
    return Predicate(
        [e](const RowView& r) {
            const Cell c = e(r);
            if (c.is_missing())
                return false;
            return c.as<bool>();
        },
        e.columns());
}

namespace detail {

inline void require_columns(const Table& t, const std::vector<std::string>& names) {
    for (const auto& n : names)
        (void)t.position(n);
}

/// Table holding a row subset (in order) of a valid parent: index and key
/// are kept, the interval re-inferred.
inline TemporalTable derive_subset(const TemporalTable& parent, Table data) {
    const auto layout = check_layout(data, parent.index(), parent.key());
    Interval iv = Interval::unknown();
    if (parent.order_dirty()) {
        const Table sorted = data.take(canonical_order(data, layout));
        iv = infer_interval(index_runs(sorted, layout), parent.declared_regular());
    } else {
        iv = infer_interval(index_runs(data, layout), parent.declared_regular());
    }
    TemporalTable out = TemporalAccess::make(std::move(data), parent.index(), parent.key(), std::move(iv),
                                             parent.declared_regular());
    TemporalAccess::grouping(out) = parent.grouping();
    TemporalAccess::order_dirty(out) = parent.order_dirty();
    return out;
}

/// Keeps the grouping when every grouping column survived.
inline void carry_grouping(const TemporalTable& from, TemporalTable& to) {
    if (!from.grouping())
        return;
    for (const auto& c : from.grouping()->columns)
        if (!to.data().has(c))
            return;
    TemporalAccess::grouping(to) = from.grouping();
}

inline std::vector<std::size_t> matching_rows(const Table& t, const Predicate& p) {
    require_columns(t, p.columns());
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < t.rows(); ++r)
        if (p(t.row(r)))
            rows.push_back(r);
    return rows;
}

inline bool in_canonical_order(const Table& d, const Layout& l) {
    for (std::size_t r = 1; r < d.rows(); ++r) {
        int c = 0;
        for (auto k : l.key)
            if ((c = compare_cells(d.column(k)[r - 1], d.column(k)[r])) != 0)
                break;
        if (c > 0 || (c == 0 && compare_cells(d.column(l.index)[r - 1], d.column(l.index)[r]) >= 0))
            return false;
    }
    return true;
}

} // namespace detail

/// Rows satisfying `p`, in their current order.
inline VerbOutcome filter(const TemporalTable& t, const Predicate& p) {
    const auto rows = detail::matching_rows(t.data(), p);
    return {detail::derive_subset(t, t.data().take(rows)), {}};
}

/// Parsed time-window expression as an inclusive tick range at the index
/// granularity. Half-open ends are std::nullopt.
struct IndexRange {
    std::optional<std::int64_t> lo;
    std::optional<std::int64_t> hi;

    bool contains(std::int64_t tick) const noexcept {
        return (!lo || tick >= *lo) && (!hi || tick <= *hi);
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    while (!s.empty() && s.front() == ' ')
        s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ')
        s.remove_suffix(1);
    return std::string(s);
}

/// Tick bounds at `g` of index values whose period starts inside the
/// bound's period.
inline std::pair<std::int64_t, std::int64_t> bound_ticks(std::string_view text, Granularity g, std::string_view kind,
                                                         std::string_view zone) {
    if (!kind.empty()) {
        auto a = find_index_adapter(kind);
        if (!a)
            throw schema_error("no index adapter registered for kind '" + std::string(kind) + "'");
        auto t = a->to_ticks(text);
        if (!t)
            throw parse_error("'" + std::string(text) + "' is not a valid " + std::string(kind) + " value");
        return {*t, *t};
    }
    auto t = detect_time(text, zone);
    if (!t)
        throw parse_error("cannot parse time bound '" + std::string(text) + "'");
    if (g == Granularity::ordinal) {
        const std::int64_t v = t->granularity == Granularity::year ? t->ticks + 1970 : t->ticks;
        if (t->granularity != Granularity::ordinal && t->granularity != Granularity::year)
            throw precondition_error("'" + std::string(text) + "' is not an ordinal bound");
        return {v, v};
    }
    if (t->granularity == Granularity::ordinal)
        throw precondition_error("'" + std::string(text) + "' is not a calendar bound");
    if (!coarser_or_equal(t->granularity, g))
        throw precondition_error("time bound '" + std::string(text) + "' is finer than the " +
                                 std::string(to_string(g)) + " index");
    const auto [start, end] = wall_clock_span(*t);
    TimePoint lo = from_wall_clock(g, start, zone);
    if (local_start_ms(lo) < start)
        ++lo.ticks;
    const TimePoint hi = from_wall_clock(g, end - 1, zone);
    return {lo.ticks, hi.ticks};
}

} // namespace detail

/// Parses "2011", "2013-01 ~ 2013-03", "~ 2012", "2012 ~" against an index
/// of granularity `g`. Coarser bounds expand to everything they cover.
inline IndexRange parse_index_range(std::string_view text, Granularity g, std::string_view kind = {},
                                    std::string_view zone = {}) {
    const auto tilde = text.find('~');
    IndexRange r;
    if (tilde == std::string_view::npos) {
        const auto s = detail::trim(text);
        if (s.empty())
            throw parse_error("empty time expression");
        auto [lo, hi] = detail::bound_ticks(s, g, kind, zone);
        return {lo, hi};
    }
    if (text.find('~', tilde + 1) != std::string_view::npos)
        throw parse_error("time expression has more than one '~'");
    const auto left = detail::trim(text.substr(0, tilde));
    const auto right = detail::trim(text.substr(tilde + 1));
    if (left.empty() && right.empty())
        throw parse_error("time expression '~' needs at least one bound");
    if (!left.empty())
        r.lo = detail::bound_ticks(left, g, kind, zone).first;
    if (!right.empty())
        r.hi = detail::bound_ticks(right, g, kind, zone).second;
    return r;
}

inline VerbOutcome filter_index(const TemporalTable& t, std::string_view expression) {
    const Column& idx = t.index_column();
    std::string kind;
    for (const auto& c : idx.cells())
        if (auto tp = c.get_if<TimePoint>()) {
            kind = tp->kind;
            break;
        }
    const auto range = parse_index_range(expression, t.index_granularity(), kind, t.index_zone());
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < idx.size(); ++r)
        if (range.contains(idx[r].as<TimePoint>().ticks))
            rows.push_back(r);
    return {detail::derive_subset(t, t.data().take(rows)), {}};
}

struct SortKey {
    std::string column;
    bool descending = false;
};

/// Reorders rows. If the result leaves (key, index) order, a warning is
/// attached and the table is flagged order-dirty; order-sensitive
/// operations re-sort it first.
inline VerbOutcome arrange(const TemporalTable& t, const std::vector<SortKey>& by) {
    const Table& d = t.data();
    std::vector<std::size_t> cols;
    for (const auto& k : by)
        cols.push_back(d.position(k.column));
    std::vector<std::size_t> order(d.rows());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        for (std::size_t i = 0; i < cols.size(); ++i) {
            int c = compare_cells(d.column(cols[i])[a], d.column(cols[i])[b]);
            if (by[i].descending)
                c = -c;
            if (c != 0)
                return c < 0;
        }
        return false;
    });
    TemporalTable out = t;
    detail::TemporalAccess::data(out) = d.take(order);
    const auto layout = detail::check_layout(out.data(), t.index(), t.key());
    const bool canonical = detail::in_canonical_order(out.data(), layout);
    detail::TemporalAccess::order_dirty(out) = !canonical;
    std::vector<std::string> warnings;
    if (!canonical)
        warnings.push_back("rows are no longer ordered by key and index ('" + t.index() +
                           "'); order-sensitive operations will re-sort them");
    return {std::move(out), std::move(warnings)};
}

/// Keeps the named columns. The index is kept (with a note) when omitted
/// but every key column is selected; otherwise dropping it is an error.
/// Dropped key columns shrink the key, which must still identify rows.
inline VerbOutcome select(const TemporalTable& t, const std::vector<std::string>& names) {
    const Table& d = t.data();
    detail::require_columns(d, names);
    for (std::size_t i = 0; i < names.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (names[i] == names[j])
                throw schema_error("column '" + names[i] + "' selected twice");

    auto selected = [&](const std::string& n) { return std::find(names.begin(), names.end(), n) != names.end(); };
    std::vector<std::string> warnings;
    std::vector<std::string> keep = names;
    if (!selected(t.index())) {
        const bool all_keys = std::all_of(t.key().begin(), t.key().end(), selected);
        if (!all_keys)
            throw validity_error("selection removes the index '" + t.index() +
                                 "'; keep it in the selection, or summarize to aggregate over time");
        keep.insert(keep.begin(), t.index());
        warnings.push_back("index '" + t.index() + "' is always kept");
    }
    std::vector<std::string> key;
    for (const auto& k : t.key())
        if (selected(k))
            key.push_back(k);

    std::vector<Column> cols;
    for (const auto& n : keep)
        cols.push_back(d.column(n));
    Table projected(std::move(cols));
    if (key.size() != t.key().size()) {
        auto rep = duplicates(projected, t.index(), key);
        if (!rep.empty()) {
            const auto layout = detail::check_layout(projected, t.index(), key);
            throw validity_error("key (" + [&] {
                std::string s;
                for (const auto& k : key)
                    s += k + ", ";
                return s;
            }() + t.index() + ") no longer identifies rows: " +
                                 detail::describe_row(projected, layout, rep.positions[0]) + " appears in rows " +
                                 std::to_string(rep.positions[0] + 1) + " and " + std::to_string(rep.positions[1] + 1));
        }
    }
    TemporalTable out = build(projected, t.index(), key, t.declared_regular());
    detail::carry_grouping(t, out);
    if (t.order_dirty() && key.size() == t.key().size()) {
        detail::TemporalAccess::data(out) = projected;
        detail::TemporalAccess::order_dirty(out) = true;
    }
    return {std::move(out), std::move(warnings)};
}

namespace detail {

inline Column evaluate(const Table& d, const std::string& name, const Expression& e) {
    require_columns(d, e.columns());
    Column c(name);
    c.reserve(d.rows());
    for (std::size_t r = 0; r < d.rows(); ++r)
        c.push_back(e(d.row(r)));
    return c;
}

inline bool touches_structure(const TemporalTable& t, const std::string& name) {
    return name == t.index() || std::find(t.key().begin(), t.key().end(), name) != t.key().end();
}

} // namespace detail

/// Adds or overwrites a column. Overwriting the index or a key column
/// re-validates uniqueness and order.
inline VerbOutcome mutate(const TemporalTable& t, const std::string& name, const Expression& e) {
    Table d = t.data();
    d.set_column(detail::evaluate(t.data(), name, e));
    if (detail::touches_structure(t, name)) {
        TemporalTable out = build(d, t.index(), t.key(), t.declared_regular());
        detail::carry_grouping(t, out);
        return {std::move(out), {}};
    }
    TemporalTable out = t;
    detail::TemporalAccess::data(out) = std::move(d);
    return {std::move(out), {}};
}

/// Like mutate, but the result holds only key, index and the new columns.
inline VerbOutcome transmute(const TemporalTable& t, const std::vector<std::pair<std::string, Expression>>& exprs) {
    std::vector<Column> computed;
    for (const auto& [name, e] : exprs)
        computed.push_back(detail::evaluate(t.data(), name, e));
    bool structural = false;
    std::vector<Column> cols;
    for (const auto& c : t.data().columns()) {
        if (detail::touches_structure(t, c.name()))
            cols.push_back(c);
    }
    for (auto& c : computed) {
        auto it = std::find_if(cols.begin(), cols.end(), [&](const Column& x) { return x.name() == c.name(); });
        if (it != cols.end()) {
            structural = true;
            *it = std::move(c);
        } else {
            cols.push_back(std::move(c));
        }
    }
    Table d(std::move(cols));
    if (structural) {
        TemporalTable out = build(d, t.index(), t.key(), t.declared_regular());
        detail::carry_grouping(t, out);
        return {std::move(out), {}};
    }
    TemporalTable out = t;
    detail::TemporalAccess::data(out) = std::move(d);
    detail::TemporalAccess::grouping(out).reset();
    detail::carry_grouping(t, out);
    return {std::move(out), {}};
}

inline TemporalTable group_by(const TemporalTable& t, const std::vector<std::string>& columns) {
    detail::require_columns(t.data(), columns);
    TemporalTable out = t;
    Grouping g;
    if (t.grouping())
        g.index = t.grouping()->index;
    for (const auto& c : columns)
        if (c != t.index())
            g.columns.push_back(c);
    detail::TemporalAccess::grouping(out) = std::move(g);
    return out;
}

inline TemporalTable group_by_key(const TemporalTable& t) { return group_by(t, t.key()); }

inline TemporalTable ungroup(const TemporalTable& t) {
    TemporalTable out = t;
    detail::TemporalAccess::grouping(out).reset();
    return out;
}

/// Groups by the index collapsed to granularity `g`. The derived index is
/// named `name` (defaults to the index name) and materialized by summarize.
inline TemporalTable index_by(const TemporalTable& t, Granularity g, std::string name = {}) {
    const Granularity current = t.index_granularity();
    if (t.rows() > 0 && !coarser_or_equal(g, current))
        throw precondition_error("index_by needs a granularity at least as coarse as " +
                                 std::string(to_string(current)) + ", got " + std::string(to_string(g)));
    for (const auto& c : t.index_column().cells())
        (void)floor_to(c.as<TimePoint>(), g);
    TemporalTable out = t;
    auto& grouping = detail::TemporalAccess::grouping(out);
    if (!grouping)
        grouping.emplace();
    grouping->index = IndexGrouping{name.empty() ? t.index() : std::move(name), g, {}};
    return out;
}

/// Groups by a caller-supplied index mapping, which must be monotone
/// (t1 < t2 implies f(t1) <= f(t2)) over the table's index values.
inline TemporalTable index_by(const TemporalTable& t, std::string name,
                              std::function<TimePoint(const TimePoint&)> mapping) {
    std::vector<TimePoint> values;
    for (const auto& c : t.index_column().cells())
        values.push_back(c.as<TimePoint>());
    std::sort(values.begin(), values.end(), [](const TimePoint& a, const TimePoint& b) { return a.ticks < b.ticks; });
    std::optional<TimePoint> prev;
    for (const auto& v : values) {
        TimePoint m = mapping(v);
        if (prev) {
            if (!m.comparable_with(*prev))
                throw schema_error("index mapping returns values of mixed granularity");
            if (m.ticks < prev->ticks)
                throw precondition_error("index mapping is not monotone: " + format_time(v) + " maps before " +
                                         format_time(*prev));
        }
        prev = std::move(m);
    }
    TemporalTable out = t;
    auto& grouping = detail::TemporalAccess::grouping(out);
    if (!grouping)
        grouping.emplace();
    grouping->index = IndexGrouping{std::move(name), std::nullopt, std::move(mapping)};
    return out;
}

struct Summary {
    std::string output;
    std::string column;
    Aggregator aggregator;
};

/// One row per (grouping columns, index or derived index). The result's
/// key is the grouping columns; without grouping only the index remains.
inline TemporalTable summarize(const TemporalTable& input, const std::vector<Summary>& summaries) {
    const TemporalTable t = restore_order(input);
    const Table& d = t.data();
    std::vector<std::string> group_cols;
    std::optional<IndexGrouping> ig;
    if (t.grouping()) {
        group_cols = t.grouping()->columns;
        ig = t.grouping()->index;
    }
    const std::string index_name = ig ? ig->name : t.index();
    const auto group_pos = d.positions(group_cols);
    std::vector<std::size_t> source_pos;
    std::set<std::string> out_names(group_cols.begin(), group_cols.end());
    out_names.insert(index_name);
    for (const auto& s : summaries) {
        source_pos.push_back(d.position(s.column));
        if (!out_names.insert(s.output).second)
            throw schema_error("summary output '" + s.output + "' clashes with another output column");
    }

    auto less = [](const KeyTuple& a, const KeyTuple& b) { return compare_tuples(a, b) < 0; };
    std::map<KeyTuple, std::vector<std::size_t>, decltype(less)> groups(less);
    const Column& idx = t.index_column();
    for (std::size_t r = 0; r < d.rows(); ++r) {
        KeyTuple k = d.tuple(group_pos, r);
        const TimePoint& tp = idx[r].as<TimePoint>();
        k.emplace_back(ig ? ig->apply(tp) : tp);
        groups[std::move(k)].push_back(r);
    }

    std::vector<Column> cols;
    for (const auto& c : group_cols)
        cols.emplace_back(c);
    cols.emplace_back(index_name);
    for (const auto& s : summaries)
        cols.emplace_back(s.output);
    std::vector<Cell> scratch;
    for (const auto& [k, rows] : groups) {
        for (std::size_t i = 0; i < k.size(); ++i)
            cols[i].push_back(k[i]);
        for (std::size_t s = 0; s < summaries.size(); ++s) {
            const Column& src = d.column(source_pos[s]);
            scratch.clear();
            for (auto r : rows)
                scratch.push_back(src[r]);
            cols[k.size() + s].push_back(aggregate(scratch, summaries[s].aggregator, src.kind()));
        }
    }
    const bool regular = ig ? true : t.declared_regular();
    return build(Table(std::move(cols)), index_name, group_cols, regular);
}

/// Melts `columns` into (names_to, values_to) pairs; names_to joins the key.
inline VerbOutcome gather(const TemporalTable& t, const std::vector<std::string>& columns, const std::string& names_to,
                          const std::string& values_to) {
    const Table& d = t.data();
    detail::require_columns(d, columns);
    if (columns.empty())
        throw precondition_error("gather needs at least one column");
    CellKind kind = CellKind::missing;
    for (const auto& c : columns) {
        if (detail::touches_structure(t, c))
            throw schema_error("cannot gather key or index column '" + c + "'");
        const CellKind k = d.column(c).kind();
        if (k != CellKind::missing) {
            if (kind != CellKind::missing && kind != k)
                throw schema_error("gathered columns mix " + std::string(to_string(kind)) + " and " +
                                   std::string(to_string(k)) + " values");
            kind = k;
        }
    }
    std::vector<std::size_t> rest;
    for (std::size_t c = 0; c < d.cols(); ++c)
        if (std::find(columns.begin(), columns.end(), d.column(c).name()) == columns.end())
            rest.push_back(c);
    for (auto c : rest)
        if (d.column(c).name() == names_to || d.column(c).name() == values_to)
            throw schema_error("gather output '" + d.column(c).name() + "' clashes with an existing column");
    if (names_to == values_to)
        throw schema_error("gather needs distinct names for the name and value columns");

    std::vector<Column> cols;
    for (auto c : rest)
        cols.emplace_back(d.column(c).name());
    Column names(names_to), values(values_to);
    const auto gathered = d.positions(columns);
    for (std::size_t r = 0; r < d.rows(); ++r) {
        for (std::size_t g = 0; g < gathered.size(); ++g) {
            for (std::size_t i = 0; i < rest.size(); ++i)
                cols[i].push_back(d.column(rest[i])[r]);
            names.push_back(Cell(columns[g]));
            values.push_back(d.column(gathered[g])[r]);
        }
    }
    cols.push_back(std::move(names));
    cols.push_back(std::move(values));
    auto key = t.key();
    key.push_back(names_to);
    TemporalTable out = build(Table(std::move(cols)), t.index(), key, t.declared_regular());
    detail::carry_grouping(t, out);
    return {std::move(out), {}};
}

/// Widens `value_column` into one column per distinct `key_column` value.
/// Rows are identified by every remaining column; a repeated (identity,
/// spread value) pair is a validity error.
inline VerbOutcome spread(const TemporalTable& t, const std::string& key_column, const std::string& value_column) {
    const Table& d = t.data();
    const auto kpos = d.position(key_column);
    const auto vpos = d.position(value_column);
    if (key_column == value_column)
        throw schema_error("spread needs different key and value columns");
    if (key_column == t.index() || value_column == t.index())
        throw schema_error("cannot spread the index column");
    for (const auto& k : t.key())
        if (k == value_column)
            throw schema_error("cannot spread key column '" + k + "' as values");

    std::vector<std::size_t> ident;
    for (std::size_t c = 0; c < d.cols(); ++c)
        if (c != kpos && c != vpos)
            ident.push_back(c);

    // New column names, ordered by the spread key's values.
    std::vector<Cell> levels;
    for (const auto& c : d.column(kpos).cells())
        levels.push_back(c);
    std::sort(levels.begin(), levels.end(), [](const Cell& a, const Cell& b) { return compare_cells(a, b) < 0; });
    levels.erase(std::unique(levels.begin(), levels.end(),
                             [](const Cell& a, const Cell& b) { return compare_cells(a, b) == 0; }),
                 levels.end());
    std::vector<std::string> level_names;
    for (const auto& l : levels) {
        level_names.push_back(to_text(l));
        for (auto c : ident)
            if (d.column(c).name() == level_names.back())
                throw schema_error("spread column '" + level_names.back() + "' clashes with an existing column");
    }
    for (std::size_t i = 1; i < level_names.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (level_names[i] == level_names[j])
                throw schema_error("spread values render to the same column name '" + level_names[i] + "'");

    std::unordered_map<KeyTuple, std::size_t, KeyTupleHash> row_of;
    std::vector<std::size_t> firsts;
    std::vector<std::vector<Cell>> wide;
    std::vector<std::vector<bool>> seen;
    for (std::size_t r = 0; r < d.rows(); ++r) {
        auto [it, inserted] = row_of.try_emplace(d.tuple(ident, r), firsts.size());
        if (inserted) {
            firsts.push_back(r);
            wide.emplace_back(levels.size());
            seen.emplace_back(levels.size(), false);
        }
        const Cell& level = d.column(kpos)[r];
        const auto li = std::size_t(
            std::lower_bound(levels.begin(), levels.end(), level,
                             [](const Cell& a, const Cell& b) { return compare_cells(a, b) < 0; }) -
            levels.begin());
        if (seen[it->second][li])
            throw validity_error("spread found more than one '" + value_column + "' value for " + key_column + " = " +
                                 level_names[li] + " at row " + std::to_string(r + 1));
        seen[it->second][li] = true;
        wide[it->second][li] = d.column(vpos)[r];
    }

    std::vector<Column> cols;
    for (auto c : ident)
        cols.push_back(d.column(c).take(firsts));
    for (std::size_t l = 0; l < levels.size(); ++l) {
        Column c(level_names[l]);
        for (const auto& w : wide)
            c.push_back(w[l]);
        cols.push_back(std::move(c));
    }
    std::vector<std::string> key;
    for (const auto& k : t.key())
        if (k != key_column)
            key.push_back(k);
    TemporalTable out = build(Table(std::move(cols)), t.index(), key, t.declared_regular());
    detail::carry_grouping(t, out);
    return {std::move(out), {}};
}

enum class JoinKind : std::uint8_t { left, right, inner, full, semi, anti };

/// Relational join against a plain table on (left column, right column)
/// pairs. Non-key columns of `other` that clash get a ".y" suffix. The
/// result must still be a valid temporal table.
inline VerbOutcome join(const TemporalTable& t, const Table& other, JoinKind kind,
                        const std::vector<std::pair<std::string, std::string>>& by) {
    const Table& d = t.data();
    if (by.empty())
        throw precondition_error("join needs at least one column pair");
    std::vector<std::size_t> lpos, rpos;
    for (const auto& [l, r] : by) {
        lpos.push_back(d.position(l));
        rpos.push_back(other.position(r));
    }
    std::unordered_map<KeyTuple, std::vector<std::size_t>, KeyTupleHash> index;
    for (std::size_t r = 0; r < other.rows(); ++r)
        index[other.tuple(rpos, r)].push_back(r);

    std::vector<std::size_t> extra;  // other's non-by columns
    for (std::size_t c = 0; c < other.cols(); ++c)
        if (std::find(rpos.begin(), rpos.end(), c) == rpos.end())
            extra.push_back(c);

    static const std::vector<std::size_t> none;
    auto matches = [&](std::size_t r) -> const std::vector<std::size_t>& {
        auto it = index.find(d.tuple(lpos, r));
        return it == index.end() ? none : it->second;
    };

    if (kind == JoinKind::semi || kind == JoinKind::anti) {
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < d.rows(); ++r)
            if (matches(r).empty() == (kind == JoinKind::anti))
                rows.push_back(r);
        return {detail::derive_subset(t, d.take(rows)), {}};
    }

    std::vector<Column> cols;
    for (const auto& c : d.columns())
        cols.emplace_back(c.name());
    for (auto c : extra) {
        std::string name = other.column(c).name();
        if (d.has(name))
            name += ".y";
        if (d.has(name))
            throw schema_error("join output column '" + name + "' already exists");
        cols.emplace_back(name);
    }
    const std::size_t nl = d.cols();
    auto emit = [&](std::optional<std::size_t> l, std::optional<std::size_t> r) {
        for (std::size_t c = 0; c < nl; ++c) {
            if (l) {
                cols[c].push_back(d.column(c)[*l]);
                continue;
            }
            auto it = std::find(lpos.begin(), lpos.end(), c);
            cols[c].push_back(it != lpos.end() ? other.column(rpos[std::size_t(it - lpos.begin())])[*r]
                                               : Cell::missing());
        }
        for (std::size_t e = 0; e < extra.size(); ++e)
            cols[nl + e].push_back(r ? other.column(extra[e])[*r] : Cell::missing());
    };

    std::vector<bool> used(other.rows(), false);
    for (std::size_t r = 0; r < d.rows(); ++r) {
        const auto& m = matches(r);
        for (auto o : m) {
            used[o] = true;
            emit(r, o);
        }
        if (m.empty() && (kind == JoinKind::left || kind == JoinKind::full))
            emit(r, std::nullopt);
    }
    if (kind == JoinKind::right || kind == JoinKind::full)
        for (std::size_t o = 0; o < other.rows(); ++o)
            if (!used[o])
                emit(std::nullopt, o);

    TemporalTable out = build(Table(std::move(cols)), t.index(), t.key(), t.declared_regular());
    detail::carry_grouping(t, out);
    return {std::move(out), {}};
}

} // namespace tempus
