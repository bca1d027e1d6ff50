#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "tempus/error.hpp"
#include "tempus/time.hpp"

namespace tempus {

enum class CellKind : std::uint8_t { missing, integer, real, text, boolean, time };

constexpr std::string_view to_string(CellKind k) noexcept {
    switch (k) {
    case CellKind::missing: return "missing";
    case CellKind::integer: return "integer";
    case CellKind::real: return "real";
    case CellKind::text: return "text";
    case CellKind::boolean: return "boolean";
    case CellKind::time: return "time";
    }
    return "?";
}

/// One value of a heterogeneous table.
class Cell {
public:
    using Value = std::variant<std::monostate, std::int64_t, double, std::string, bool, TimePoint>;

    Cell() = default;
    Cell(std::int64_t v) : value_(v) {}
    Cell(int v) : value_(std::int64_t{v}) {}
    Cell(double v) : value_(v) {}
    Cell(std::string v) : value_(std::move(v)) {}
    Cell(std::string_view v) : value_(std::string(v)) {}
    Cell(const char* v) : value_(std::string(v)) {}
    Cell(bool v) : value_(v) {}
    Cell(TimePoint v) : value_(std::move(v)) {}

    static Cell missing() { return Cell{}; }

    CellKind kind() const noexcept { return static_cast<CellKind>(value_.index()); }
    bool is_missing() const noexcept { return value_.index() == 0; }

    template <class T>
    const T* get_if() const noexcept { return std::get_if<T>(&value_); }

    template <class T>
    const T& as() const {
        if (auto p = std::get_if<T>(&value_))
            return *p;
        throw schema_error("cell holds " + std::string(to_string(kind())) + " where another kind was expected");
    }

    /// Integer or real as double; std::nullopt for anything else.
    std::optional<double> number() const noexcept {
        if (auto i = get_if<std::int64_t>())
            return double(*i);
        if (auto d = get_if<double>())
            return *d;
        return std::nullopt;
    }

    const Value& value() const noexcept { return value_; }

    friend bool operator==(const Cell& a, const Cell& b) {
        if (a.value_.index() != b.value_.index())
            return false;
        if (auto x = a.get_if<double>()) {
            const double y = *b.get_if<double>();
            return *x == y || (std::isnan(*x) && std::isnan(y));
        }
        return a.value_ == b.value_;
    }

private:
    Value value_;
};

/// Total order used for sorting: missing sorts last; cells of different
/// kinds order by kind; time values of different granularity order by
/// granularity first.
inline int compare_cells(const Cell& a, const Cell& b) noexcept {
    if (a.is_missing() || b.is_missing())
        return int(a.is_missing()) - int(b.is_missing());
    if (a.kind() != b.kind())
        return a.kind() < b.kind() ? -1 : 1;
    auto three = [](const auto& x, const auto& y) { return x < y ? -1 : (y < x ? 1 : 0); };
    switch (a.kind()) {
    case CellKind::integer: return three(*a.get_if<std::int64_t>(), *b.get_if<std::int64_t>());
    case CellKind::real: {
        const double x = *a.get_if<double>(), y = *b.get_if<double>();
        if (std::isnan(x) || std::isnan(y))
            return int(std::isnan(x)) - int(std::isnan(y));
        return three(x, y);
    }
    case CellKind::text: return a.get_if<std::string>()->compare(*b.get_if<std::string>()) < 0
                                    ? -1
                                    : (*a.get_if<std::string>() == *b.get_if<std::string>() ? 0 : 1);
    case CellKind::boolean: return three(*a.get_if<bool>(), *b.get_if<bool>());
    case CellKind::time: {
        const auto& x = *a.get_if<TimePoint>();
        const auto& y = *b.get_if<TimePoint>();
        if (x.granularity != y.granularity)
            return x.granularity < y.granularity ? -1 : 1;
        if (x.kind != y.kind)
            return x.kind < y.kind ? -1 : 1;
        return three(x.ticks, y.ticks);
    }
    case CellKind::missing: break;
    }
    return 0;
}

inline std::size_t hash_cell(const Cell& c) noexcept {
    const std::size_t k = c.value().index() * 0x9e3779b97f4a7c15ULL;
    switch (c.kind()) {
    case CellKind::integer: return k ^ std::hash<std::int64_t>{}(*c.get_if<std::int64_t>());
    case CellKind::real: return k ^ std::hash<double>{}(*c.get_if<double>());
    case CellKind::text: return k ^ std::hash<std::string>{}(*c.get_if<std::string>());
    case CellKind::boolean: return k ^ std::size_t(*c.get_if<bool>());
    case CellKind::time: {
        const auto& t = *c.get_if<TimePoint>();
        return k ^ std::hash<std::int64_t>{}(t.ticks) ^ (std::size_t(t.granularity) << 7);
    }
    case CellKind::missing: break;
    }
    return k;
}

/// Plain text rendering used for CSV output and diagnostics. Missing
/// renders as "NA"; reals use the shortest round-tripping form.
inline std::string to_text(const Cell& c) {
    switch (c.kind()) {
    case CellKind::missing: return "NA";
    case CellKind::integer: return std::to_string(*c.get_if<std::int64_t>());
    case CellKind::real: {
        const double d = *c.get_if<double>();
        if (std::isnan(d))
            return "NaN";
        if (std::isinf(d))
            return d > 0 ? "Inf" : "-Inf";
        char buf[64];
        auto res = std::to_chars(buf, buf + sizeof buf, d);
        return std::string(buf, res.ptr);
    }
    case CellKind::text: return *c.get_if<std::string>();
    case CellKind::boolean: return *c.get_if<bool>() ? "TRUE" : "FALSE";
    case CellKind::time: return format_time(*c.get_if<TimePoint>());
    }
    return {};
}

using KeyTuple = std::vector<Cell>;

struct KeyTupleHash {
    std::size_t operator()(const KeyTuple& k) const noexcept {
        std::size_t h = k.size();
        for (const auto& c : k)
            h ^= hash_cell(c) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    }
};

inline int compare_tuples(const KeyTuple& a, const KeyTuple& b) noexcept {
    for (std::size_t i = 0; i < a.size() && i < b.size(); ++i) {
        if (int c = compare_cells(a[i], b[i]))
            return c;
    }
    return a.size() < b.size() ? -1 : (a.size() > b.size() ? 1 : 0);
}

/// Named vector of cells sharing one kind (or missing).
class Column {
public:
    Column() = default;
    explicit Column(std::string name) : name_(std::move(name)) {}
    Column(std::string name, std::vector<Cell> cells) : name_(std::move(name)) {
        cells_.reserve(cells.size());
        for (auto& c : cells)
            push_back(std::move(c));
    }

    const std::string& name() const noexcept { return name_; }
    void rename(std::string name) { name_ = std::move(name); }

    /// Kind shared by all non-missing cells; `missing` when there are none.
    CellKind kind() const noexcept { return kind_; }
    std::size_t size() const noexcept { return cells_.size(); }
    const Cell& operator[](std::size_t i) const noexcept { return cells_[i]; }
    const std::vector<Cell>& cells() const noexcept { return cells_; }

    void reserve(std::size_t n) { cells_.reserve(n); }

    void push_back(Cell c) {
        if (!c.is_missing()) {
            if (kind_ == CellKind::missing)
                kind_ = c.kind();
            else if (c.kind() != kind_)
                throw schema_error("column '" + name_ + "' holds " + std::string(to_string(kind_)) +
                                   " values; cannot add a " + std::string(to_string(c.kind())) + " value");
        }
        cells_.push_back(std::move(c));
    }

    Column take(std::span<const std::size_t> rows) const {
        Column out(name_);
        out.kind_ = kind_;
        out.cells_.reserve(rows.size());
        for (auto r : rows)
            out.cells_.push_back(cells_[r]);
        return out;
    }

private:
    std::string name_;
    CellKind kind_ = CellKind::missing;
    std::vector<Cell> cells_;
};

class Table;

/// Read-only view of one row, addressed by column name.
class RowView {
public:
    RowView(const Table& table, std::size_t row) noexcept : table_(&table), row_(row) {}

    const Cell& operator[](std::string_view column) const;
    std::size_t position() const noexcept { return row_; }
    const Table& table() const noexcept { return *table_; }

private:
    const Table* table_;
    std::size_t row_;
};

/// Ordered collection of equally sized, uniquely named columns.
class Table {
public:
    Table() = default;
    explicit Table(std::vector<Column> columns) {
        for (auto& c : columns)
            add_column(std::move(c));
    }

    std::size_t rows() const noexcept { return columns_.empty() ? rows_ : columns_.front().size(); }
    std::size_t cols() const noexcept { return columns_.size(); }
    bool empty() const noexcept { return rows() == 0; }

    const std::vector<Column>& columns() const noexcept { return columns_; }

    std::optional<std::size_t> find(std::string_view name) const noexcept {
        for (std::size_t i = 0; i < columns_.size(); ++i)
            if (columns_[i].name() == name)
                return i;
        return std::nullopt;
    }
    bool has(std::string_view name) const noexcept { return find(name).has_value(); }

    std::size_t position(std::string_view name) const {
        if (auto i = find(name))
            return *i;
        throw schema_error("unknown column '" + std::string(name) + "'");
    }

    const Column& column(std::string_view name) const { return columns_[position(name)]; }
    const Column& column(std::size_t i) const { return columns_.at(i); }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        out.reserve(columns_.size());
        for (const auto& c : columns_)
            out.push_back(c.name());
        return out;
    }

    void add_column(Column c) {
        if (has(c.name()))
            throw schema_error("duplicate column name '" + c.name() + "'");
        if (!columns_.empty() && c.size() != rows())
            throw schema_error("column '" + c.name() + "' has " + std::to_string(c.size()) + " rows, table has " +
                               std::to_string(rows()));
        if (columns_.empty() && rows_ != 0 && c.size() != rows_)
            throw schema_error("column '" + c.name() + "' has the wrong number of rows");
        columns_.push_back(std::move(c));
    }

    /// Adds or overwrites a column, keeping position on overwrite.
    void set_column(Column c) {
        if (auto i = find(c.name())) {
            if (c.size() != rows())
                throw schema_error("column '" + c.name() + "' has the wrong number of rows");
            columns_[*i] = std::move(c);
        } else {
            add_column(std::move(c));
        }
    }

    void drop_column(std::string_view name) { columns_.erase(columns_.begin() + std::ptrdiff_t(position(name))); }

    Table take(std::span<const std::size_t> rows) const {
        Table out;
        out.rows_ = rows.size();
        for (const auto& c : columns_)
            out.columns_.push_back(c.take(rows));
        return out;
    }

    RowView row(std::size_t i) const noexcept { return RowView(*this, i); }

    std::vector<Cell> row_cells(std::size_t i) const {
        std::vector<Cell> out;
        out.reserve(columns_.size());
        for (const auto& c : columns_)
            out.push_back(c[i]);
        return out;
    }

    /// Tuple of the named columns' cells at `row`; positions from positions().
    KeyTuple tuple(std::span<const std::size_t> cols, std::size_t row) const {
        KeyTuple out;
        out.reserve(cols.size());
        for (auto c : cols)
            out.push_back(columns_[c][row]);
        return out;
    }

    std::vector<std::size_t> positions(std::span<const std::string> names) const {
        std::vector<std::size_t> out;
        out.reserve(names.size());
        for (const auto& n : names)
            out.push_back(position(n));
        return out;
    }

    friend bool operator==(const Table& a, const Table& b) {
        if (a.cols() != b.cols() || a.rows() != b.rows())
            return false;
        for (std::size_t i = 0; i < a.cols(); ++i) {
            if (a.columns_[i].name() != b.columns_[i].name() || a.columns_[i].cells() != b.columns_[i].cells())
                return false;
        }
        return true;
    }

private:
    std::vector<Column> columns_;
    std::size_t rows_ = 0;
};

inline const Cell& RowView::operator[](std::string_view column) const {
    return table_->column(column)[row_];
}

/// Builds a table row by row; handy in tests and for small literal tables.
class TableBuilder {
public:
    explicit TableBuilder(std::vector<std::string> names) {
        for (auto& n : names)
            columns_.emplace_back(std::move(n));
    }

    TableBuilder& row(std::vector<Cell> cells) {
        if (cells.size() != columns_.size())
            throw schema_error("row has " + std::to_string(cells.size()) + " cells, expected " +
                               std::to_string(columns_.size()));
        for (std::size_t i = 0; i < cells.size(); ++i)
            columns_[i].push_back(std::move(cells[i]));
        return *this;
    }

    Table build() const { return Table(columns_); }

private:
    std::vector<Column> columns_;
};

} // namespace tempus
