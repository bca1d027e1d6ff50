#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <ranges>
#include <span>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "tempus/construct.hpp"
#include "tempus/gaps.hpp"

namespace tempus {

enum class Partial : std::uint8_t { complete_only, emit_partial };

struct Window {
    std::size_t size = 1;
    std::size_t step = 1;
    Partial partial = Partial::complete_only;

    void validate() const {
        if (size < 1)
            throw precondition_error("window size must be >= 1");
        if (step < 1)
            throw precondition_error("window step must be >= 1");
    }
};

/// Half-open [begin, end) position range of one window.
struct Span {
    std::size_t begin;
    std::size_t end;

    friend bool operator==(const Span&, const Span&) = default;
};

/// Sliding windows [i, i + size) for i = 0, step, ...; with emit_partial
/// the growing prefixes of length 1 .. size-1 come first.
inline std::vector<Span> slide_spans(std::size_t n, const Window& w) {
    w.validate();
    std::vector<Span> out;
    if (w.partial == Partial::emit_partial)
        for (std::size_t k = 1; k < w.size && k <= n; ++k)
            out.push_back({0, k});
    for (std::size_t i = 0; i + w.size <= n; i += w.step)
        out.push_back({i, i + w.size});
    return out;
}

/// Consecutive blocks of `size`; the last block may be shorter.
inline std::vector<Span> tile_spans(std::size_t n, std::size_t size) {
    if (size < 1)
        throw precondition_error("tile size must be >= 1");
    std::vector<Span> out;
    for (std::size_t i = 0; i < n; i += size)
        out.push_back({i, std::min(i + size, n)});
    return out;
}

/// Prefixes of length init, init + step, ... up to n.
inline std::vector<Span> stretch_spans(std::size_t n, std::size_t init, std::size_t step) {
    if (init < 1)
        throw precondition_error("stretch initial window must be >= 1");
    if (step < 1)
        throw precondition_error("stretch step must be >= 1");
    std::vector<Span> out;
    for (std::size_t len = init; len <= n; len += step)
        out.push_back({0, len});
    return out;
}

namespace detail {

template <class R>
using elem_t = std::ranges::range_value_t<R>;

template <class R, class F>
auto apply_spans(const R& xs, F& f, const std::vector<Span>& spans) {
    using T = elem_t<R>;
    const std::span<const T> all(std::ranges::data(xs), std::ranges::size(xs));
    using Out = std::decay_t<std::invoke_result_t<F&, std::span<const T>>>;
    std::vector<Out> out;
    out.reserve(spans.size());
    for (const auto& s : spans)
        out.push_back(f(all.subspan(s.begin, s.end - s.begin)));
    return out;
}

} // namespace detail

template <std::ranges::contiguous_range R, class F>
auto slide(const R& xs, F&& f, const Window& w) {
    return detail::apply_spans(xs, f, slide_spans(std::ranges::size(xs), w));
}

template <std::ranges::contiguous_range R, class F>
auto tile(const R& xs, F&& f, std::size_t size) {
    return detail::apply_spans(xs, f, tile_spans(std::ranges::size(xs), size));
}

template <std::ranges::contiguous_range R, class F>
auto stretch(const R& xs, F&& f, std::size_t init, std::size_t step = 1) {
    return detail::apply_spans(xs, f, stretch_spans(std::ranges::size(xs), init, step));
}

/// Two equal-length inputs windowed position-wise; f(x_window, y_window).
template <std::ranges::contiguous_range RX, std::ranges::contiguous_range RY, class F>
auto slide2(const RX& xs, const RY& ys, F&& f, const Window& w) {
    using X = detail::elem_t<RX>;
    using Y = detail::elem_t<RY>;
    if (std::ranges::size(xs) != std::ranges::size(ys))
        throw precondition_error("slide2 inputs differ in length: " + std::to_string(std::ranges::size(xs)) +
                                 " vs " + std::to_string(std::ranges::size(ys)));
    const std::span<const X> ax(std::ranges::data(xs), std::ranges::size(xs));
    const std::span<const Y> ay(std::ranges::data(ys), std::ranges::size(ys));
    using Out = std::decay_t<std::invoke_result_t<F&, std::span<const X>, std::span<const Y>>>;
    std::vector<Out> out;
    for (const auto& s : slide_spans(ax.size(), w))
        out.push_back(f(ax.subspan(s.begin, s.end - s.begin), ay.subspan(s.begin, s.end - s.begin)));
    return out;
}

/// Any number of equal-length inputs; f receives one window per input.
template <class T, class F>
auto pslide(const std::vector<std::span<const T>>& lists, F&& f, const Window& w) {
    const std::size_t n = lists.empty() ? 0 : lists.front().size();
    for (const auto& l : lists)
        if (l.size() != n)
            throw precondition_error("pslide inputs differ in length");
    using Out = std::decay_t<std::invoke_result_t<F&, const std::vector<std::span<const T>>&>>;
    std::vector<Out> out;
    std::vector<std::span<const T>> windows(lists.size());
    for (const auto& s : slide_spans(n, w)) {
        for (std::size_t i = 0; i < lists.size(); ++i)
            windows[i] = lists[i].subspan(s.begin, s.end - s.begin);
        out.push_back(f(std::as_const(windows)));
    }
    return out;
}

/// Checks that every window result has the requested kind and unwraps it.
template <class T>
std::vector<T> typed_results(const std::vector<Cell>& cells) {
    std::vector<T> out;
    out.reserve(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const T* v = cells[i].get_if<T>();
        if (!v)
            throw typed_result_error("window " + std::to_string(i) + " returned a " +
                                         std::string(to_string(cells[i].kind())) + " value",
                                     i);
        out.push_back(*v);
    }
    return out;
}

namespace detail {

template <class F>
auto as_cell(F& f) {
    return [&f](auto window) { return Cell(f(window)); };
}

} // namespace detail

// Typed variants: f may return anything convertible to Cell; the result
// must be of the named kind at every position.

template <std::ranges::contiguous_range R, class F>
std::vector<double> slide_real(const R& xs, F&& f, const Window& w) {
    return typed_results<double>(slide(xs, detail::as_cell(f), w));
}
template <std::ranges::contiguous_range R, class F>
std::vector<std::int64_t> slide_int(const R& xs, F&& f, const Window& w) {
    return typed_results<std::int64_t>(slide(xs, detail::as_cell(f), w));
}
template <std::ranges::contiguous_range R, class F>
std::vector<bool> slide_bool(const R& xs, F&& f, const Window& w) {
    return typed_results<bool>(slide(xs, detail::as_cell(f), w));
}
template <std::ranges::contiguous_range R, class F>
std::vector<std::string> slide_text(const R& xs, F&& f, const Window& w) {
    return typed_results<std::string>(slide(xs, detail::as_cell(f), w));
}

template <std::ranges::contiguous_range R, class F>
std::vector<double> tile_real(const R& xs, F&& f, std::size_t size) {
    return typed_results<double>(tile(xs, detail::as_cell(f), size));
}
template <std::ranges::contiguous_range R, class F>
std::vector<std::int64_t> tile_int(const R& xs, F&& f, std::size_t size) {
    return typed_results<std::int64_t>(tile(xs, detail::as_cell(f), size));
}
template <std::ranges::contiguous_range R, class F>
std::vector<bool> tile_bool(const R& xs, F&& f, std::size_t size) {
    return typed_results<bool>(tile(xs, detail::as_cell(f), size));
}
template <std::ranges::contiguous_range R, class F>
std::vector<std::string> tile_text(const R& xs, F&& f, std::size_t size) {
    return typed_results<std::string>(tile(xs, detail::as_cell(f), size));
}

template <std::ranges::contiguous_range R, class F>
std::vector<double> stretch_real(const R& xs, F&& f, std::size_t init, std::size_t step = 1) {
    return typed_results<double>(stretch(xs, detail::as_cell(f), init, step));
}
template <std::ranges::contiguous_range R, class F>
std::vector<std::int64_t> stretch_int(const R& xs, F&& f, std::size_t init, std::size_t step = 1) {
    return typed_results<std::int64_t>(stretch(xs, detail::as_cell(f), init, step));
}
template <std::ranges::contiguous_range R, class F>
std::vector<bool> stretch_bool(const R& xs, F&& f, std::size_t init, std::size_t step = 1) {
    return typed_results<bool>(stretch(xs, detail::as_cell(f), init, step));
}
template <std::ranges::contiguous_range R, class F>
std::vector<std::string> stretch_text(const R& xs, F&& f, std::size_t init, std::size_t step = 1) {
    return typed_results<std::string>(stretch(xs, detail::as_cell(f), init, step));
}

enum class RollOp : std::uint8_t { slide, tile, stretch };

inline std::string_view to_string(RollOp op) noexcept {
    switch (op) {
    case RollOp::slide: return "slide";
    case RollOp::tile: return "tile";
    case RollOp::stretch: return "stretch";
    }
    return "?";
}

/// Window configuration for roll_by_key. slide uses window.size/step,
/// tile uses window.size, stretch uses init and window.step.
struct RollSpec {
    RollOp op = RollOp::slide;
    Window window;
    std::size_t init = 1;
};

enum class Execution : std::uint8_t { sequential, parallel };

/// Applies a rolling function to `column` independently within each key.
/// Results sit on the index of each window's last row; with emit_partial
/// every row is kept and rows that end no window get a missing value.
/// `f` must be pure: keys may be processed concurrently. Gappy regular
/// tables are refused.
inline TemporalTable roll_by_key(const TemporalTable& input, const std::string& column, const RollSpec& spec,
                                 const std::function<double(std::span<const double>)>& f,
                                 Execution exec = Execution::sequential, std::string output = {},
                                 unsigned threads = 0) {
    const TemporalTable t = restore_order(input);
    const Column& src = t.column(column);
    if (src.kind() != CellKind::integer && src.kind() != CellKind::real && src.kind() != CellKind::missing)
        throw schema_error("rolling column '" + column + "' holds " + std::string(to_string(src.kind())) +
                           " values, not numbers");
    if (output.empty())
        output = column + "_" + std::string(to_string(spec.op));
    if (output == t.index() || std::find(t.key().begin(), t.key().end(), output) != t.key().end())
        throw schema_error("rolling output '" + output + "' clashes with the key or index");
    spec.window.validate();

    if (t.interval().is_regular()) {
        const Table flags = has_gaps(t, false);
        const Column& g = flags.column("has_gaps");
        for (std::size_t i = 0; i < g.size(); ++i)
            if (g[i].as<bool>())
                throw gap_error("series has implicit gaps; make them explicit with fill_gaps before rolling");
    }

    const auto groups = key_groups(t);
    std::vector<double> values(src.size());
    for (std::size_t r = 0; r < src.size(); ++r)
        values[r] = src[r].number().value_or(std::nan(""));

    // Per group: (row, value) for every window end.
    std::vector<std::vector<std::pair<std::size_t, double>>> results(groups.size());
    auto run_group = [&](std::size_t gi) {
        const auto& g = groups[gi];
        const std::span<const double> xs(values.data() + g.begin, g.size());
        std::vector<Span> spans;
        switch (spec.op) {
        case RollOp::slide: spans = slide_spans(xs.size(), spec.window); break;
        case RollOp::tile: spans = tile_spans(xs.size(), spec.window.size); break;
        case RollOp::stretch: spans = stretch_spans(xs.size(), spec.init, spec.window.step); break;
        }
        auto& out = results[gi];
        out.reserve(spans.size());
        for (const auto& s : spans)
            out.emplace_back(g.begin + s.end - 1, f(xs.subspan(s.begin, s.end - s.begin)));
    };

    if (exec == Execution::parallel && groups.size() > 1) {
        if (threads == 0)
            threads = std::max(1u, std::thread::hardware_concurrency());
        const std::size_t workers = std::min<std::size_t>(threads, groups.size());
        std::vector<std::future<void>> jobs;
        for (std::size_t w = 0; w < workers; ++w)
            jobs.push_back(std::async(std::launch::async, [&, w] {
                for (std::size_t gi = w; gi < groups.size(); gi += workers)
                    run_group(gi);
            }));
        for (auto& j : jobs)
            j.get();
    } else {
        for (std::size_t gi = 0; gi < groups.size(); ++gi)
            run_group(gi);
    }

    const Table& d = t.data();
    const auto key_pos = d.positions(t.key());
    const auto idx_pos = d.position(t.index());
    std::vector<Column> cols;
    for (const auto& k : t.key())
        cols.emplace_back(k);
    cols.emplace_back(t.index());
    Column out_col(output);
    auto emit = [&](std::size_t row, const Cell& v) {
        for (std::size_t i = 0; i < key_pos.size(); ++i)
            cols[i].push_back(d.column(key_pos[i])[row]);
        cols[key_pos.size()].push_back(d.column(idx_pos)[row]);
        out_col.push_back(v);
    };
    auto to_cell = [](double v) { return std::isnan(v) ? Cell::missing() : Cell(v); };
    // Window ends are strictly increasing within a group.
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const auto& res = results[gi];
        if (spec.window.partial == Partial::emit_partial) {
            std::size_t k = 0;
            for (std::size_t r = groups[gi].begin; r < groups[gi].end; ++r) {
                if (k < res.size() && res[k].first == r)
                    emit(r, to_cell(res[k++].second));
                else
                    emit(r, Cell::missing());
            }
        } else {
            for (const auto& [row, v] : res)
                emit(row, to_cell(v));
        }
    }
    cols.push_back(std::move(out_col));
    return build(Table(std::move(cols)), t.index(), t.key(), t.declared_regular());
}

/// roll_by_key with an aggregation from the fixed vocabulary.
inline TemporalTable roll_by_key(const TemporalTable& t, const std::string& column, const RollSpec& spec,
                                 const Aggregator& agg, Execution exec = Execution::sequential,
                                 std::string output = {}) {
    return roll_by_key(
        t, column, spec, [agg](std::span<const double> xs) { return aggregate_doubles(xs, agg); }, exec,
        std::move(output));
}

} // namespace tempus
