// Command-line front end: ingest a CSV into a temporal table, then validate,
// analyse gaps, aggregate, roll or print it. Exit codes: 0 success,
// 1 data invalid for the request, 2 usage error, 3 I/O error.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tempus/tempus.hpp"

namespace {

struct Common {
    std::string path;
    std::string index;
    std::vector<std::string> key;
    bool irregular = false;
    std::vector<std::string> formats;
    std::string zone;
    char delimiter = ',';
};

void add_common(CLI::App* app, Common& c) {
    app->add_option("csv", c.path, "Input CSV file")->required();
    app->add_option("--index,-i", c.index, "Index column")->required();
    app->add_option("--key,-k", c.key, "Key columns, comma separated")->delimiter(',');
    app->add_flag("--irregular", c.irregular, "Declare the index irregularly spaced");
    app->add_option("--format", c.formats,
                    "Time format per column as col=FORMAT; FORMAT is a granularity name, an index kind or a %-pattern");
    app->add_option("--zone", c.zone, "Zone label for date-time columns (UTC or a fixed offset)");
    app->add_option("--delimiter", c.delimiter, "Field delimiter");
}

std::pair<std::string, std::string> split_assignment(const std::string& s, const char* what) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == s.size())
        throw tempus::precondition_error(std::string(what) + " expects COLUMN=VALUE, got '" + s + "'");
    return {s.substr(0, eq), s.substr(eq + 1)};
}

tempus::IngestConfig config_of(const Common& c) {
    tempus::IngestConfig cfg;
    cfg.path = c.path;
    cfg.index = c.index;
    cfg.key = c.key;
    cfg.regular = !c.irregular;
    cfg.zone = c.zone;
    cfg.delimiter = c.delimiter;
    for (const auto& f : c.formats) {
        auto [col, fmt] = split_assignment(f, "--format");
        cfg.time_format[col] = fmt;
    }
    return cfg;
}

bool is_aggregator_name(const std::string& s) {
    return s == "sum" || s == "mean" || s == "min" || s == "max" || s == "count" || s.starts_with("quantile:");
}

/// Reads a constant fill value as the kind of the column it fills.
tempus::Cell typed_constant(const tempus::Column& col, const std::string& text) {
    using tempus::CellKind;
    const tempus::CsvField field{text, false};
    if (tempus::detail::is_missing_token(field))
        return tempus::Cell::missing();
    switch (col.kind()) {
    case CellKind::integer:
        if (auto v = tempus::detail::parse_integer(text)) return tempus::Cell(*v);
        break;
    case CellKind::real:
        if (auto v = tempus::detail::parse_real(text)) return tempus::Cell(*v);
        break;
    case CellKind::boolean:
        if (auto v = tempus::detail::parse_boolean(text)) return tempus::Cell(*v);
        break;
    case CellKind::time:
        for (const auto& c : col.cells())
            if (const auto* tp = c.get_if<tempus::TimePoint>())
                return tempus::Cell(tempus::parse_time(text, tp->granularity, tp->zone));
        break;
    case CellKind::text:
    case CellKind::missing: return tempus::Cell(text);
    }
    throw tempus::schema_error("fill value '" + text + "' does not fit column '" + col.name() + "' of kind " +
                               std::string(tempus::to_string(col.kind())));
}

void write(const tempus::Table& t) { tempus::write_csv(std::cout, t); }

int fail(const std::string& message, int code) {
    std::cerr << "tempus: " << message << '\n';
    return code;
}

int exit_code_of(const tempus::error& e) {
    const std::string cat = e.category();
    if (cat == "io")
        return 3;
    if (cat == "schema" || cat == "precondition" || cat == "registration")
        return 2;
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Temporal tables from CSV: validate, gap analysis, aggregation, rolling windows"};
    app.require_subcommand(1);

    Common common;

    auto* validate = app.add_subcommand("validate", "Build the table; print its summary or the duplicate rows");
    add_common(validate, common);

    std::string gap_mode;
    bool full = false;
    std::vector<std::string> fill_with;
    auto* gaps = app.add_subcommand("gaps", "Gap analysis: has, scan, count or fill");
    gaps->add_option("mode", gap_mode, "has | scan | count | fill")
        ->required()
        ->check(CLI::IsMember({"has", "scan", "count", "fill"}));
    add_common(gaps, common);
    gaps->add_flag("--full", full, "Use the span of the whole table instead of each series' own span");
    gaps->add_option("--fill-with", fill_with, "Fill policy per column as col=VALUE or col=AGGREGATION");

    std::string by;
    std::vector<std::string> fns;
    std::vector<std::string> group;
    auto* agg = app.add_subcommand("agg", "Summarize per group and (optionally) coarser index");
    add_common(agg, common);
    agg->add_option("--by", by, "Target granularity for the index (year, quarter, month, week, day, hour, ...)");
    agg->add_option("--fn", fns, "Aggregation as col=sum|mean|min|max|count|quantile:p")->required();
    agg->add_option("--group", group, "Grouping columns, comma separated")->delimiter(',');

    std::string op = "slide", roll_col, roll_fn = "mean", roll_out;
    std::size_t size = 1, step = 1, init = 1;
    bool partial = false, parallel = false;
    auto* roll = app.add_subcommand("roll", "Rolling window aggregation per key");
    add_common(roll, common);
    roll->add_option("--op", op, "slide | tile | stretch")->check(CLI::IsMember({"slide", "tile", "stretch"}));
    roll->add_option("--col", roll_col, "Numeric column to roll over")->required();
    roll->add_option("--fn", roll_fn, "sum | mean | min | max | count | quantile:p");
    roll->add_option("--size", size, "Window size (slide, tile)")->check(CLI::PositiveNumber);
    roll->add_option("--step", step, "Window step (slide, stretch)")->check(CLI::PositiveNumber);
    roll->add_option("--init", init, "Initial window length (stretch)")->check(CLI::PositiveNumber);
    roll->add_flag("--partial", partial, "Keep every row; leading partial windows are computed");
    roll->add_flag("--parallel", parallel, "Process keys concurrently");
    roll->add_option("--out", roll_out, "Output column name (default <col>_<op>)");

    auto* print = app.add_subcommand("print", "Print the contextual summary");
    add_common(print, common);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const auto cfg = config_of(common);

        if (validate->parsed()) {
            try {
                const auto t = tempus::ingest(cfg);
                for (const auto& note : tempus::construction_notes(t))
                    std::cerr << "tempus: note: " << note << '\n';
                std::cout << tempus::render_summary(t);
                return 0;
            } catch (const tempus::construction_error& e) {
                if (!e.report().positions.empty())
                    write(tempus::duplicate_report_table(e.report()));
                return fail(e.what(), 1);
            }
        }

        const auto t = tempus::ingest(cfg);

        if (gaps->parsed()) {
            if (gap_mode == "has") {
                write(tempus::has_gaps(t, full));
            } else if (gap_mode == "scan") {
                write(tempus::scan_gaps(t, full));
            } else if (gap_mode == "count") {
                write(tempus::count_gaps(t, full).to_table());
            } else {
                std::map<std::string, tempus::FillPolicy> policies;
                for (const auto& f : fill_with) {
                    auto [col, value] = split_assignment(f, "--fill-with");
                    policies[col] = is_aggregator_name(value)
                                        ? tempus::FillPolicy::per_key(tempus::parse_aggregator(value))
                                        : tempus::FillPolicy::constant(typed_constant(t.column(col), value));
                }
                write(tempus::fill_gaps(t, policies, full).data());
            }
            return 0;
        }

        if (agg->parsed()) {
            tempus::TemporalTable grouped = group.empty() ? t : tempus::group_by(t, group);
            if (!by.empty()) {
                const auto g = tempus::parse_granularity(by);
                if (!g)
                    throw tempus::precondition_error("unknown granularity '" + by + "'");
                grouped = tempus::index_by(grouped, *g);
            }
            std::vector<tempus::Summary> summaries;
            for (const auto& f : fns) {
                auto [col, fn] = split_assignment(f, "--fn");
                const auto a = tempus::parse_aggregator(fn);
                summaries.push_back({col + "_" + tempus::aggregator_label(a), col, a});
            }
            write(tempus::summarize(grouped, summaries).data());
            return 0;
        }

        if (roll->parsed()) {
            tempus::RollSpec spec;
            spec.op = op == "tile" ? tempus::RollOp::tile : op == "stretch" ? tempus::RollOp::stretch : tempus::RollOp::slide;
            spec.window = {size, step, partial ? tempus::Partial::emit_partial : tempus::Partial::complete_only};
            spec.init = init;
            const auto exec = parallel ? tempus::Execution::parallel : tempus::Execution::sequential;
            write(tempus::roll_by_key(t, roll_col, spec, tempus::parse_aggregator(roll_fn), exec, roll_out).data());
            return 0;
        }

        if (print->parsed()) {
            std::cout << tempus::render_summary(t);
            return 0;
        }
    } catch (const tempus::construction_error& e) {
        if (!e.report().positions.empty())
            tempus::write_csv(std::cerr, tempus::duplicate_report_table(e.report()));
        return fail(e.what(), 1);
    } catch (const tempus::error& e) {
        return fail(e.what(), exit_code_of(e));
    } catch (const std::exception& e) {
        return fail(e.what(), 1);
    }
    return 2;
}
