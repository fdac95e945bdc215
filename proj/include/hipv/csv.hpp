#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace hipv::csv {

/// Shortest decimal text that reads back to the same double.
std::string format_double(double value);

/// Strict numeric parse of one cell; throws std::invalid_argument naming the
/// line on failure.
double parse_double(std::string_view text, std::size_t line);

std::vector<std::string_view> split(std::string_view line, char sep = ',');

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Column index by header name, or throws.
  std::size_t column(std::string_view name) const;
};

/// Numeric CSV with a single header line. Blank lines and lines starting with
/// '#' are skipped.
Table read_table(std::istream& in);
Table read_table_file(const std::string& path);

void write_row(std::ostream& out, const std::vector<double>& values);

}  // namespace hipv::csv
