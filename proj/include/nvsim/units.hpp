#pragma once

// Quantities with optional unit suffixes, converted to us and mW.
//   durations: s, ms, us, µs, ns   (bare number = us)
//   powers:    W, mW, uW, µW       (bare number = mW)

#include "nvsim/error.hpp"

#include <charconv>
#include <string>
#include <string_view>
#include <utility>

namespace nvsim::units {

enum class Quantity { Duration, Power, Plain };

namespace detail {

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::pair<double, std::string_view> split_number(std::string_view text, std::string_view field)
{
    const std::string_view s = trim(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr == s.data()) {
        throw ValidationError(std::string(field) + ": cannot parse number from '" + std::string(text) + "'");
    }
    return {value, trim(s.substr(static_cast<std::size_t>(ptr - s.data())))};
}

} // namespace detail

inline double parse(std::string_view text, Quantity quantity, std::string_view field = "value")
{
    const auto [value, suffix] = detail::split_number(text, field);
    if (suffix.empty()) return value;
    auto bad = [&]() -> double {
        throw ValidationError(std::string(field) + ": unknown unit '" + std::string(suffix) + "' in '" +
                              std::string(text) + "'");
    };
    switch (quantity) {
    case Quantity::Duration:
        if (suffix == "us" || suffix == "\xC2\xB5s") return value;
        if (suffix == "ns") return value * 1e-3;
        if (suffix == "ms") return value * 1e3;
        if (suffix == "s") return value * 1e6;
        return bad();
    case Quantity::Power:
        if (suffix == "mW") return value;
        if (suffix == "W") return value * 1e3;
        if (suffix == "uW" || suffix == "\xC2\xB5W") return value * 1e-3;
        return bad();
    case Quantity::Plain:
        return bad();
    }
    return bad();
}

inline double parse_duration(std::string_view text, std::string_view field = "duration")
{
    return parse(text, Quantity::Duration, field);
}

inline double parse_power(std::string_view text, std::string_view field = "power")
{
    return parse(text, Quantity::Power, field);
}

inline double parse_plain(std::string_view text, std::string_view field = "value")
{
    return parse(text, Quantity::Plain, field);
}

inline bool parse_bool(std::string_view text, std::string_view field = "flag")
{
    const std::string_view s = detail::trim(text);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ValidationError(std::string(field) + ": expected true/false (got '" + std::string(text) + "')");
}

} // namespace nvsim::units
