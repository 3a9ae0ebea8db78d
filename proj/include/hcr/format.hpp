#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace hcr {

/// Shortest decimal text that round-trips the double (locale independent).
std::string format_double(double v);

/// Fixed-point with `decimals` digits, C locale.
std::string format_fixed(double v, int decimals);

// Strict parsers: the whole field must be consumed; empty -> nullopt is
// *not* implied, an empty string simply fails to parse.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

std::string trim(std::string_view s);

}  // namespace hcr
