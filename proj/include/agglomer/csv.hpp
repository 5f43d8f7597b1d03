#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace agglomer::csv {

// Minimal RFC-4180 reader: quoted fields, doubled quotes, CRLF tolerated.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  // Index of a header column, or -1.
  int column(std::string_view name) const;
  // Index of a header column; throws MissingColumn if absent.
  std::size_t require(std::string_view name) const;
};

Table read(std::istream& in);
Table read_file(const std::string& path);

std::string escape(std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

// Shortest round-trip representation; "" for NaN (missing).
std::string format_double(double value);
// Parses a double; empty or "NA" yields NaN.
double parse_double(std::string_view text);

}  // namespace agglomer::csv
