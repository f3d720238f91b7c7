#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace stppm::cli {

/// A header-led CSV table. Fields may be double-quoted; quotes inside quoted
/// fields are doubled. Blank lines are skipped.
struct CsvTable {
  std::filesystem::path source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;  ///< 1-based file line of each row

  /// Column index by name, or -1.
  int find(const std::string& name) const;
  /// Column index by name; throws DataError naming the file when absent.
  int require(const std::string& name) const;
  /// "file:line" for diagnostics.
  std::string where(std::size_t row) const;
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text, const std::filesystem::path& source = {});

/// Quotes a field when it contains a comma, quote or newline.
std::string csv_escape(const std::string& field);

/// %.17g formatting, which round-trips every double.
std::string format_double(double v);

/// Strict numeric parsing; throws DataError with the given context.
double parse_double(const std::string& s, const std::string& context);
long parse_long(const std::string& s, const std::string& context);

}  // namespace stppm::cli
