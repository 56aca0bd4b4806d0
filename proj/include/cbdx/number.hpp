#pragma once

#include <array>
#include <charconv>
#include <optional>
#include <string>
#include <string_view>

namespace cbdx {

// Shortest decimal string that parses back to the same double, never in
// exponent notation.
inline std::string format_decimal(double v) {
    std::array<char, 400> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, std::chars_format::fixed);
    if (res.ec != std::errc{}) return "nan";
    return std::string(buf.data(), res.ptr);
}

inline std::optional<double> parse_decimal(std::string_view text) {
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto res = std::from_chars(first, last, v, std::chars_format::fixed);
    if (res.ec != std::errc{} || res.ptr != last) return std::nullopt;
    return v;
}

} // namespace cbdx
