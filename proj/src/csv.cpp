#include "artc/csv.hpp"

#include "artc/errors.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>

namespace artc::csv {

namespace {

// Reads one record; returns false at end of input. Quoted fields may span lines.
bool read_record(std::istream& in, std::vector<std::string>& fields, std::size_t record) {
  fields.clear();
  int c = in.get();
  if (c == std::char_traits<char>::eof()) return false;

  std::string field;
  bool quoted = false;
  bool field_started = false;
  for (;; c = in.get()) {
    if (c == std::char_traits<char>::eof()) {
      if (quoted) throw ParseError("unterminated quoted field", record);
      fields.push_back(std::move(field));
      return true;
    }
    const char ch = static_cast<char>(c);
    if (quoted) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get();
          field.push_back('"');
        } else {
          quoted = false;
        }
      } else {
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
      field_started = false;
    } else if (ch == '\n' || ch == '\r') {
      if (ch == '\r' && in.peek() == '\n') in.get();
      fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(ch);
      field_started = true;
    }
  }
}

bool blank(const std::vector<std::string>& fields) { return fields.size() == 1 && fields[0].empty(); }

}  // namespace

Table read(std::istream& in) {
  Table table;
  std::vector<std::string> fields;
  // skip a UTF-8 byte order mark
  if (in.peek() == 0xEF) {
    char bom[3];
    in.read(bom, 3);
  }
  if (!read_record(in, fields, 0) || blank(fields)) throw SchemaError("CSV input is empty (no header row)");
  table.header = fields;

  std::size_t row = 0;
  while (read_record(in, fields, row + 1)) {
    if (blank(fields)) continue;
    ++row;
    if (fields.size() != table.header.size()) {
      throw ParseError("row " + std::to_string(row) + " has " + std::to_string(fields.size()) + " fields, header has " +
                           std::to_string(table.header.size()),
                       row);
    }
    table.rows.push_back(fields);
  }
  return table;
}

Table read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open '" + path + "'");
  return read(in);
}

std::string escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out.push_back('"');
    out.push_back(ch);
  }
  out.push_back('"');
  return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    out << escape(fields[i]);
  }
  out << '\n';
}

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

}  // namespace artc::csv
