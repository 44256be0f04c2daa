#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace artc::csv {

/// Header plus data rows, all fields as raw strings.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Comma-separated, double-quote escaping, CRLF or LF line endings.
/// Throws SchemaError on an empty stream and ParseError on ragged rows.
Table read(std::istream& in);
Table read_file(const std::string& path);

/// Quote a field only when it contains a comma, a quote, or a line break.
std::string escape(const std::string& field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double value);

}  // namespace artc::csv
