#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sphmc {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t num_cols() const {
    return header.empty() ? (rows.empty() ? 0 : rows.front().size()) : header.size();
  }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

/// Reads a comma-separated numeric table. Ragged or non-numeric rows are
/// reported with their line number.
inline CsvTable read_csv(const std::string& path, bool has_header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  CsvTable table;
  std::string line;
  std::size_t lineno = 0;
  std::size_t expected = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = detail::split_csv_line(line);
    if (lineno == 1 && has_header) {
      table.header = cells;
      expected = cells.size();
      continue;
    }
    if (expected == 0) expected = cells.size();
    if (cells.size() != expected) {
      throw std::runtime_error(path + ": row " + std::to_string(lineno) + " has " +
                               std::to_string(cells.size()) + " columns, expected " +
                               std::to_string(expected));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      std::size_t pos = 0;
      double v = 0.0;
      try {
        v = std::stod(c, &pos);
      } catch (const std::exception&) {
        throw std::runtime_error(path + ": malformed value '" + c + "' at row " +
                                 std::to_string(lineno));
      }
      if (pos != c.size()) {
        throw std::runtime_error(path + ": malformed value '" + c + "' at row " +
                                 std::to_string(lineno));
      }
      row.push_back(v);
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

/// Shortest round-trippable decimal representation.
inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace sphmc
