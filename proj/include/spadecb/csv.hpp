#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace spadecb::csv {

// Shortest round-tripping is not required; 17 significant digits always
// round-trips an IEEE double.
std::string format_double(double v);

std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view line, char sep = ',');

// Throws ParseError carrying row/column on failure.
double parse_double(const std::string& token, int row, int column);
long long parse_int(const std::string& token, int row, int column);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& contents);

// Splits text into lines, stripping '\r'. Line numbers are index + 1.
std::vector<std::string> lines(const std::string& text);

}  // namespace spadecb::csv
