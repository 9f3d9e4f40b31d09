#include "netmimo/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace netmimo {

int CsvTable::column_index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return static_cast<int>(i);
  return -1;
}

std::vector<double> CsvTable::numeric_column(const std::string& name) const {
  const int idx = column_index(name);
  if (idx < 0) throw std::runtime_error("csv: no column named '" + name + "'");
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    const std::string& cell = row.at(static_cast<std::size_t>(idx));
    if (cell.empty()) {
      out.push_back(std::numeric_limits<double>::quiet_NaN());
    } else {
      std::size_t pos = 0;
      const double v = std::stod(cell, &pos);
      if (pos != cell.size()) throw std::runtime_error("csv: non-numeric cell '" + cell + "'");
      out.push_back(v);
    }
  }
  return out;
}

void write_csv(const std::string& path, const CsvTable& table) {
  std::ofstream f(path, std::ios::binary);  // binary: stable newlines
  if (!f) throw std::runtime_error("csv: cannot open '" + path + "' for writing");
  for (const auto& c : table.comments) f << "# " << c << "\n";
  for (std::size_t i = 0; i < table.columns.size(); ++i)
    f << table.columns[i] << (i + 1 < table.columns.size() ? "," : "");
  f << "\n";
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size())
      throw std::runtime_error("csv: row width does not match header");
    for (std::size_t i = 0; i < row.size(); ++i)
      f << row[i] << (i + 1 < row.size() ? "," : "");
    f << "\n";
  }
  if (!f) throw std::runtime_error("csv: write to '" + path + "' failed");
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

CsvTable read_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("csv: cannot open '" + path + "'");
  CsvTable t;
  std::string line;
  bool have_header = false;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::size_t start = line.size() > 1 && line[1] == ' ' ? 2 : 1;
      t.comments.push_back(line.substr(start));
      continue;
    }
    if (!have_header) {
      t.columns = split_fields(line);
      have_header = true;
      continue;
    }
    auto row = split_fields(line);
    if (row.size() != t.columns.size())
      throw std::runtime_error("csv: malformed row in '" + path + "'");
    t.rows.push_back(std::move(row));
  }
  if (!have_header) throw std::runtime_error("csv: '" + path + "' has no header");
  return t;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  if (std::isfinite(v) && std::floor(v) == v && std::abs(v) < 1e15) {
    std::snprintf(buf, sizeof buf, "%.0f", v);
    return buf;
  }
  // %.17g round-trips; trim to the shortest representation that reads back
  // exactly for stable, locale-free output.
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

}  // namespace netmimo
