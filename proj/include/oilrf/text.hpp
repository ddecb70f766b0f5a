#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace oilrf {

// Shortest decimal string that round-trips the double (locale independent).
std::string format_double(double v);

// Fixed-point rendering with the given number of decimals, for table text.
std::string format_fixed(double v, int decimals);

// Parses a full string as double; returns false on trailing garbage or empty input.
bool parse_double(std::string_view s, double& out);

std::vector<std::string> split(std::string_view line, char sep);

// Strips a trailing '\r' (CRLF input) in place.
void chomp(std::string& line);

}  // namespace oilrf
