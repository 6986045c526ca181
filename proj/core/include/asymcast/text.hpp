#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace asymcast::text {

/// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

/// Fixed-point rendering with `decimals` digits after the point.
std::string format_fixed(double value, int decimals);

std::optional<double> parse_double(std::string_view token);
std::optional<std::int64_t> parse_int(std::string_view token);
std::optional<std::uint64_t> parse_uint(std::string_view token);

std::string_view trim(std::string_view s);
std::string lower(std::string_view s);

/// Splits on `delimiter`, trimming each piece. Empty input gives no pieces.
std::vector<std::string> split_list(std::string_view s, char delimiter = ',');

}  // namespace asymcast::text
