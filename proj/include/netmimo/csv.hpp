#pragma once

#include <string>
#include <vector>

namespace netmimo {

// Comma-separated table with '#' comment lines before the header. Cells are
// kept as strings; empty string means missing.
struct CsvTable {
  std::vector<std::string> comments;  // without the leading "# "
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  int column_index(const std::string& name) const;  // -1 if absent
  // Numeric view of a column; missing cells become NaN.
  std::vector<double> numeric_column(const std::string& name) const;
};

void write_csv(const std::string& path, const CsvTable& table);
CsvTable read_csv(const std::string& path);

// Deterministic shortest-roundtrip formatting used for all numeric output.
std::string format_double(double v);

}  // namespace netmimo
