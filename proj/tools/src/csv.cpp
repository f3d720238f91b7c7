#include "stppm/cli/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "stppm/errors.hpp"

namespace stppm::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Splits one logical record starting at pos; advances pos past the record
// and the line counter past every newline consumed.
std::vector<std::string> next_record(const std::string& text, std::size_t& pos, int& line,
                                     const std::filesystem::path& source) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool was_quoted = false;
  const int start_line = line;
  while (pos < text.size()) {
    const char c = text[pos++];
    if (quoted) {
      if (c == '"') {
        if (pos < text.size() && text[pos] == '"') {
          field += '"';
          ++pos;
        } else {
          quoted = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      was_quoted = true;
    } else if (c == ',') {
      fields.push_back(was_quoted ? field : trim(field));
      field.clear();
      was_quoted = false;
    } else if (c == '\n') {
      ++line;
      break;
    } else {
      field += c;
    }
  }
  if (quoted) {
    throw DataError(source.string() + ":" + std::to_string(start_line) + ": unterminated quoted field");
  }
  fields.push_back(was_quoted ? field : trim(field));
  return fields;
}

bool blank(const std::vector<std::string>& fields) {
  return fields.size() == 1 && fields[0].empty();
}

}  // namespace

int CsvTable::find(const std::string& name) const {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == name) return static_cast<int>(c);
  }
  return -1;
}

int CsvTable::require(const std::string& name) const {
  const int c = find(name);
  if (c < 0) throw DataError(source.string() + ": missing column '" + name + "'");
  return c;
}

std::string CsvTable::where(std::size_t row) const {
  return source.string() + ":" + std::to_string(line_numbers.at(row));
}

CsvTable parse_csv(const std::string& text, const std::filesystem::path& source) {
  CsvTable table;
  table.source = source;
  std::size_t pos = 0;
  int line = 1;
  // Skip a UTF-8 byte order mark.
  if (text.rfind("\xEF\xBB\xBF", 0) == 0) pos = 3;
  bool have_header = false;
  while (pos < text.size()) {
    const int record_line = line;
    auto fields = next_record(text, pos, line, source);
    if (blank(fields)) continue;
    if (!have_header) {
      table.header = std::move(fields);
      have_header = true;
      continue;
    }
    if (fields.size() != table.header.size()) {
      throw DataError(source.string() + ":" + std::to_string(record_line) + ": expected " +
                      std::to_string(table.header.size()) + " fields, found " +
                      std::to_string(fields.size()));
    }
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(record_line);
  }
  if (!have_header) throw DataError(source.string() + ": empty file");
  return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_csv(ss.str(), path);
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& s, const std::string& context) {
  if (s.empty()) throw DataError(context + ": missing value");
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE) {
    throw DataError(context + ": not a number: '" + s + "'");
  }
  return v;
}

long parse_long(const std::string& s, const std::string& context) {
  if (s.empty()) throw DataError(context + ": missing value");
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size() || errno == ERANGE) {
    throw DataError(context + ": not an integer: '" + s + "'");
  }
  return v;
}

}  // namespace stppm::cli
