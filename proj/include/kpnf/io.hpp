#pragma once

// Small text helpers shared by the report writers.

#include <string>
#include <string_view>
#include <vector>

namespace kpnf {

/// Shortest-safe round-trip text for a double ("%.17g").
std::string format_double(double x);

/// Strict parse of a whole string; throws std::invalid_argument otherwise.
double parse_double(std::string_view text);

std::vector<std::string> split(std::string_view text, char sep);
std::string trim(std::string_view text);

inline constexpr int kFormatVersion = 1;

}  // namespace kpnf
