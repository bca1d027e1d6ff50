#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "tempus/error.hpp"

namespace tempus {

/// Teaches the engine a new kind of index value (school semesters, fiscal
/// periods, ...). Values are mapped onto integer ticks; once registered, the
/// gap, interval and rolling machinery works unchanged on those ticks.
struct IndexAdapter {
    std::string kind;          ///< registry name, also used as a time format
    std::string unit_name;     ///< e.g. "semester"
    std::string unit_letter;   ///< interval shorthand letter, e.g. "S"

    /// Raw text to ticks; std::nullopt for text that is not a valid value.
    std::function<std::optional<std::int64_t>(std::string_view)> to_ticks;
    /// Ticks back to the canonical text form.
    std::function<std::string(std::int64_t)> format;
    /// Past-to-future ordering over raw values.
    std::function<bool(std::string_view, std::string_view)> before;

    /// Representative values used to check the ordering at registration.
    std::vector<std::string> samples;
};

namespace detail {

struct AdapterRegistry {
    mutable std::shared_mutex mutex;
    std::map<std::string, std::shared_ptr<const IndexAdapter>, std::less<>> adapters;

    static AdapterRegistry& instance() {
        static AdapterRegistry registry;
        return registry;
    }
};

inline void check_adapter(const IndexAdapter& a) {
    if (a.kind.empty())
        throw registration_error("index adapter needs a non-empty kind");
    if (!a.to_ticks || !a.format || !a.before)
        throw registration_error("index adapter '" + a.kind + "' is missing a callback");
    if (a.samples.size() < 2)
        throw registration_error("index adapter '" + a.kind + "' needs at least two sample values");

    std::vector<std::int64_t> ticks;
    ticks.reserve(a.samples.size());
    for (const auto& s : a.samples) {
        auto t = a.to_ticks(s);
        if (!t)
            throw registration_error("index adapter '" + a.kind + "' rejects its own sample '" + s + "'");
        if (a.format(*t) != s && a.to_ticks(a.format(*t)) != t)
            throw registration_error("index adapter '" + a.kind + "' does not round-trip '" + s + "'");
        ticks.push_back(*t);
    }

    // The ordering must be a strict total order that agrees with the tick
    // mapping: exactly one of before(x, y), before(y, x) for distinct ticks,
    // neither for equal ticks.
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        for (std::size_t j = 0; j < a.samples.size(); ++j) {
            const bool xy = a.before(a.samples[i], a.samples[j]);
            const bool yx = a.before(a.samples[j], a.samples[i]);
            const bool ok = ticks[i] == ticks[j] ? (!xy && !yx)
                                                 : (xy != yx && xy == (ticks[i] < ticks[j]));
            if (!ok)
                throw registration_error("index adapter '" + a.kind + "' ordering is not total on '" +
                                         a.samples[i] + "' and '" + a.samples[j] + "'");
        }
    }
}

} // namespace detail

/// Registers (or replaces) an index adapter. Registration must finish before
/// tables using the kind are processed concurrently.
inline void register_index_adapter(IndexAdapter adapter) {
    detail::check_adapter(adapter);
    auto& reg = detail::AdapterRegistry::instance();
    std::unique_lock lock(reg.mutex);
    auto kind = adapter.kind;
    reg.adapters[kind] = std::make_shared<const IndexAdapter>(std::move(adapter));
}

inline std::shared_ptr<const IndexAdapter> find_index_adapter(std::string_view kind) {
    auto& reg = detail::AdapterRegistry::instance();
    std::shared_lock lock(reg.mutex);
    auto it = reg.adapters.find(kind);
    return it == reg.adapters.end() ? nullptr : it->second;
}

inline bool unregister_index_adapter(std::string_view kind) {
    auto& reg = detail::AdapterRegistry::instance();
    std::unique_lock lock(reg.mutex);
    auto it = reg.adapters.find(kind);
    if (it == reg.adapters.end())
        return false;
    reg.adapters.erase(it);
    return true;
}

} // namespace tempus
