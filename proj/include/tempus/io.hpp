#pragma once

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tempus/construct.hpp"
#include "tempus/error.hpp"
#include "tempus/interval.hpp"
#include "tempus/table.hpp"

namespace tempus {

// ---------------------------------------------------------------------------
// CSV (RFC 4180)

struct CsvField {
    std::string text;
    bool quoted = false;
};

using CsvRecord = std::vector<CsvField>;

/// Splits CSV text into records. Handles quoted fields with embedded
/// delimiters, doubled quotes and line breaks, and both LF and CRLF endings.
inline std::vector<CsvRecord> parse_csv(std::string_view text, char delimiter = ',') {
    std::vector<CsvRecord> records;
    CsvRecord record;
    CsvField field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t line = 1;

    auto end_field = [&] {
        record.push_back(std::move(field));
        field = {};
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        records.push_back(std::move(record));
        record.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.text.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n')
                    ++line;
                field.text.push_back(c);
            }
            continue;
        }
        if (c == '"' && !field_started) {
            in_quotes = true;
            field.quoted = true;
            field_started = true;
        } else if (c == delimiter) {
            end_field();
        } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
            continue;
        } else if (c == '\n') {
            ++line;
            end_record();
        } else {
            if (field.quoted)
                throw parse_error("unexpected character after closing quote on line " + std::to_string(line));
            field.text.push_back(c);
            field_started = true;
        }
    }
    if (in_quotes)
        throw parse_error("unterminated quoted field at end of input");
    if (field_started || !record.empty())
        end_record();
    return records;
}

inline std::string csv_escape(std::string_view s, char delimiter = ',') {
    const bool needs = s.find_first_of(std::string{delimiter, '"', '\n', '\r'}) != std::string_view::npos;
    if (!needs)
        return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += "\"\"";
        else
            out.push_back(c);
    }
    return out + "\"";
}

/// Header row plus one line per row; missing cells as NA.
inline void write_csv(std::ostream& os, const Table& t, char delimiter = ',') {
    for (std::size_t c = 0; c < t.cols(); ++c)
        os << (c ? std::string(1, delimiter) : std::string{}) << csv_escape(t.column(c).name(), delimiter);
    os << '\n';
    for (std::size_t r = 0; r < t.rows(); ++r) {
        for (std::size_t c = 0; c < t.cols(); ++c)
            os << (c ? std::string(1, delimiter) : std::string{}) << csv_escape(to_text(t.column(c)[r]), delimiter);
        os << '\n';
    }
}

inline std::string to_csv(const Table& t, char delimiter = ',') {
    std::ostringstream os;
    write_csv(os, t, delimiter);
    return os.str();
}

/// The duplicate rows with a leading 1-based "row" column.
inline Table duplicate_report_table(const DuplicateReport& rep) {
    const std::string name = rep.rows.has("row") ? ".row" : "row";
    Column row(name);
    for (auto p : rep.positions)
        row.push_back(Cell(std::int64_t(p + 1)));
    std::vector<Column> cols{std::move(row)};
    for (const auto& c : rep.rows.columns())
        cols.push_back(c);
    return Table(std::move(cols));
}

// ---------------------------------------------------------------------------
// Ingestion

struct IngestConfig {
    std::string path;
    std::string index;
    std::vector<std::string> key;
    bool regular = true;
    /// Per column: a granularity name ("year", "day", ...), a registered
    /// index adapter kind, or a pattern such as "%Y-%m-%d %H:%M".
    std::map<std::string, std::string> time_format;
    std::string zone;
    char delimiter = ',';
};

namespace detail {

inline bool is_missing_token(const CsvField& f) { return !f.quoted && (f.text.empty() || f.text == "NA"); }

inline std::optional<std::int64_t> parse_integer(std::string_view s) {
    std::int64_t v = 0;
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size())
        return std::nullopt;
    return v;
}

inline std::optional<double> parse_real(std::string_view s) {
    double v = 0;
    if (!s.empty() && s.front() == '+')
        s.remove_prefix(1);
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size())
        return std::nullopt;
    return v;
}

inline std::optional<bool> parse_boolean(std::string_view s) {
    if (s == "TRUE" || s == "true" || s == "True")
        return true;
    if (s == "FALSE" || s == "false" || s == "False")
        return false;
    return std::nullopt;
}

/// Parser for one time column given its declared format.
inline std::function<TimePoint(std::string_view)> time_parser(const std::string& format, const std::string& zone) {
    if (auto g = parse_granularity(format))
        return [g = *g, zone](std::string_view s) { return parse_time(s, g, zone); };
    if (auto adapter = find_index_adapter(format)) {
        return [adapter](std::string_view s) {
            auto t = adapter->to_ticks(s);
            if (!t)
                throw parse_error("'" + std::string(s) + "' is not a valid " + adapter->kind + " value");
            return TimePoint{*t, Granularity::ordinal, {}, adapter->kind};
        };
    }
    if (format.find('%') == std::string::npos)
        throw schema_error("time format '" + format + "' is neither a granularity, a registered index kind, nor a pattern");
    return [format, zone](std::string_view s) { return parse_time_pattern(s, format, zone); };
}

/// Parses a time column without a declared format: every value must be a
/// canonical time text; the finest granularity seen wins, except that a mix
/// of 4-digit years and other integers is read as ordinal.
inline std::optional<Column> auto_time_column(const std::string& name, const std::vector<const CsvField*>& fields,
                                              const std::string& zone, bool allow_bare_numbers) {
    std::vector<std::optional<TimePoint>> detected(fields.size());
    bool any = false, any_ordinal = false, any_year = false;
    Granularity finest = Granularity::year;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (is_missing_token(*fields[i]))
            continue;
        auto t = detect_time(fields[i]->text, zone);
        if (!t)
            return std::nullopt;
        const bool bare = t->granularity == Granularity::ordinal || t->granularity == Granularity::year;
        if (bare && !allow_bare_numbers)
            return std::nullopt;
        any_ordinal |= t->granularity == Granularity::ordinal;
        any_year |= t->granularity == Granularity::year;
        if (t->granularity != Granularity::ordinal && coarseness(t->granularity) < coarseness(finest))
            finest = t->granularity;
        detected[i] = std::move(t);
        any = true;
    }
    if (!any)
        return std::nullopt;
    const Granularity target = any_ordinal ? Granularity::ordinal : finest;
    if (any_ordinal && finest != Granularity::year)
        return std::nullopt;
    (void)any_year;
    Column col(name);
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (!detected[i]) {
            col.push_back(Cell::missing());
            continue;
        }
        col.push_back(detected[i]->granularity == target ? *detected[i] : parse_time(fields[i]->text, target, zone));
    }
    return col;
}

} // namespace detail

/// Types the raw CSV records column by column: integer, then real, then
/// boolean, then time (declared format or canonical text), else text. The
/// index column is always parsed as time.
inline Table typed_table(const std::vector<CsvRecord>& records, const IngestConfig& cfg) {
    if (records.empty())
        throw parse_error("CSV input has no header row");
    const CsvRecord& header = records.front();
    const std::size_t ncol = header.size();
    for (std::size_t r = 1; r < records.size(); ++r)
        if (records[r].size() != ncol)
            throw parse_error("row " + std::to_string(r) + " has " + std::to_string(records[r].size()) +
                              " fields, header has " + std::to_string(ncol));
    const std::string zone = cfg.zone.empty() ? "UTC" : cfg.zone;

    std::vector<Column> cols;
    for (std::size_t c = 0; c < ncol; ++c) {
        const std::string& name = header[c].text;
        std::vector<const CsvField*> fields;
        fields.reserve(records.size() - 1);
        for (std::size_t r = 1; r < records.size(); ++r)
            fields.push_back(&records[r][c]);

        const auto fmt = cfg.time_format.find(name);
        const bool is_index = name == cfg.index;
        if (fmt != cfg.time_format.end()) {
            auto parse = detail::time_parser(fmt->second, zone);
            Column col(name);
            for (std::size_t i = 0; i < fields.size(); ++i) {
                if (detail::is_missing_token(*fields[i])) {
                    col.push_back(Cell::missing());
                    continue;
                }
                try {
                    col.push_back(parse(fields[i]->text));
                } catch (const parse_error& e) {
                    throw parse_error("column '" + name + "', row " + std::to_string(i + 1) + ": " + e.what());
                }
            }
            cols.push_back(std::move(col));
            continue;
        }
        if (is_index) {
            if (std::all_of(fields.begin(), fields.end(), [](const CsvField* f) { return detail::is_missing_token(*f); })) {
                Column col(name);
                for (std::size_t i = 0; i < fields.size(); ++i)
                    col.push_back(Cell::missing());
                cols.push_back(std::move(col));
                continue;
            }
            if (auto col = detail::auto_time_column(name, fields, zone, true)) {
                cols.push_back(std::move(*col));
                continue;
            }
            for (std::size_t i = 0; i < fields.size(); ++i)
                if (!detail::is_missing_token(*fields[i]) && !detect_time(fields[i]->text, zone))
                    throw parse_error("index column '" + name + "', row " + std::to_string(i + 1) + ": cannot parse '" +
                                      fields[i]->text + "' as a time value");
            throw parse_error("index column '" + name + "' mixes incompatible time formats; declare a time format");
        }

        auto all = [&](auto pred) {
            bool seen = false;
            for (const auto* f : fields) {
                if (detail::is_missing_token(*f))
                    continue;
                if (!pred(f->text))
                    return false;
                seen = true;
            }
            return seen;
        };
        Column col(name);
        if (all([](const std::string& s) { return detail::parse_integer(s).has_value(); })) {
            for (const auto* f : fields)
                col.push_back(detail::is_missing_token(*f) ? Cell::missing() : Cell(*detail::parse_integer(f->text)));
        } else if (all([](const std::string& s) { return detail::parse_real(s).has_value(); })) {
            for (const auto* f : fields)
                col.push_back(detail::is_missing_token(*f) ? Cell::missing() : Cell(*detail::parse_real(f->text)));
        } else if (all([](const std::string& s) { return detail::parse_boolean(s).has_value(); })) {
            for (const auto* f : fields)
                col.push_back(detail::is_missing_token(*f) ? Cell::missing() : Cell(*detail::parse_boolean(f->text)));
        } else if (auto tcol = detail::auto_time_column(name, fields, zone, false)) {
            col = std::move(*tcol);
        } else {
            for (const auto* f : fields)
                col.push_back(detail::is_missing_token(*f) ? Cell::missing() : Cell(f->text));
        }
        cols.push_back(std::move(col));
    }
    return Table(std::move(cols));
}

inline Table read_table(std::string_view csv_text, const IngestConfig& cfg) {
    return typed_table(parse_csv(csv_text, cfg.delimiter), cfg);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw io_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad())
        throw io_error("error reading '" + path + "'");
    return ss.str();
}

inline void check_config(const IngestConfig& cfg) {
    if (cfg.index.empty())
        throw precondition_error("an index column is required");
    if (std::find(cfg.key.begin(), cfg.key.end(), cfg.index) != cfg.key.end())
        throw precondition_error("index column '" + cfg.index + "' cannot also be a key column");
}

/// Parses CSV text and builds the temporal table.
inline TemporalTable ingest_text(std::string_view csv_text, const IngestConfig& cfg) {
    check_config(cfg);
    return build(read_table(csv_text, cfg), cfg.index, cfg.key, cfg.regular);
}

inline TemporalTable ingest(const IngestConfig& cfg) {
    check_config(cfg);
    return ingest_text(read_file(cfg.path), cfg);
}

// ---------------------------------------------------------------------------
// Contextual summary

/// 5548444 -> "5,548,444".
inline std::string with_commas(std::size_t n) {
    std::string s = std::to_string(n);
    for (int i = int(s.size()) - 3; i > 0; i -= 3)
        s.insert(std::size_t(i), ",");
    return s;
}

namespace detail {

inline std::string type_label(const Column& c) {
    switch (c.kind()) {
    case CellKind::missing: return "<lgl>";
    case CellKind::integer: return "<int>";
    case CellKind::real: return "<dbl>";
    case CellKind::text: return "<chr>";
    case CellKind::boolean: return "<lgl>";
    case CellKind::time: break;
    }
    for (const auto& cell : c.cells()) {
        const auto* t = cell.get_if<TimePoint>();
        if (!t)
            continue;
        if (!t->kind.empty())
            return "<" + t->kind + ">";
        switch (t->granularity) {
        case Granularity::year: return "<year>";
        case Granularity::quarter: return "<qtr>";
        case Granularity::month: return "<mth>";
        case Granularity::week: return "<week>";
        case Granularity::day: return "<date>";
        case Granularity::ordinal: return "<ord>";
        default: return "<dttm>";
        }
    }
    return "<time>";
}

} // namespace detail

/// "# A tsibble: 12 x 5 [1Y]", "# Key:       country, gender [6]", a
/// preview of the first `preview` rows and a "# ... with N more rows"
/// trailer.
inline std::string render_summary(const TemporalTable& input, std::size_t preview = 5) {
    const TemporalTable t = restore_order(input);
    std::string out = "# A tsibble: " + with_commas(t.rows()) + " x " + with_commas(t.cols()) + " " +
                      to_string(t.interval());
    if (const auto zone = t.index_zone(); !zone.empty())
        out += " <" + zone + ">";
    out += "\n";
    if (!t.key().empty()) {
        out += "# Key:       ";
        for (std::size_t i = 0; i < t.key().size(); ++i)
            out += (i ? ", " : "") + t.key()[i];
        out += " [" + with_commas(count_keys(t)) + "]\n";
    }
    if (t.grouping() && !t.grouping()->columns.empty()) {
        const auto& g = t.grouping()->columns;
        std::unordered_set<KeyTuple, KeyTupleHash> seen;
        const auto pos = t.data().positions(g);
        for (std::size_t r = 0; r < t.rows(); ++r)
            seen.insert(t.data().tuple(pos, r));
        out += "# Groups:    ";
        for (std::size_t i = 0; i < g.size(); ++i)
            out += (i ? ", " : "") + g[i];
        out += " [" + with_commas(seen.size()) + "]\n";
    }

    const Table& d = t.data();
    const std::size_t shown = std::min(preview, d.rows());
    const std::size_t id_width = std::to_string(std::max<std::size_t>(shown, 1)).size();
    std::vector<std::vector<std::string>> cells(d.cols());
    std::vector<std::size_t> width(d.cols());
    std::vector<bool> left(d.cols());
    std::vector<std::string> types(d.cols());
    for (std::size_t c = 0; c < d.cols(); ++c) {
        const Column& col = d.column(c);
        types[c] = detail::type_label(col);
        left[c] = col.kind() == CellKind::text;
        width[c] = std::max(col.name().size(), types[c].size());
        for (std::size_t r = 0; r < shown; ++r) {
            cells[c].push_back(to_text(col[r]));
            width[c] = std::max(width[c], cells[c].back().size());
        }
    }
    auto line = [&](const std::string& id, auto text_of) {
        std::string s = std::string(id_width - std::min(id_width, id.size()), ' ') + id;
        for (std::size_t c = 0; c < d.cols(); ++c) {
            const std::string v = text_of(c);
            const std::string padding(width[c] - std::min(width[c], v.size()), ' ');
            s += " " + (left[c] ? v + padding : padding + v);
        }
        while (!s.empty() && s.back() == ' ')
            s.pop_back();
        return s + "\n";
    };
    if (d.cols() > 0) {
        out += line("", [&](std::size_t c) { return d.column(c).name(); });
        out += line("", [&](std::size_t c) { return types[c]; });
        for (std::size_t r = 0; r < shown; ++r)
            out += line(std::to_string(r + 1), [&](std::size_t c) { return cells[c][r]; });
    }
    if (d.rows() > shown) {
        const std::size_t more = d.rows() - shown;
        out += "# ... with " + with_commas(more) + (more == 1 ? " more row\n" : " more rows\n");
    }
    return out;
}

} // namespace tempus
