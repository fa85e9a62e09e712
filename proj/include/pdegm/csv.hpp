/* Minimal CSV files for convergence logs: '#'-prefixed key=value metadata
 * lines, one header row, numeric rows.  Floats are written in shortest
 * round-trip form with '.' as the decimal separator and LF line endings, so
 * identical runs produce byte-identical files.
 */
#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

namespace pdegm {

/// Shortest representation that parses back to exactly the same double.
inline std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

struct CsvFile {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

inline void write_csv(const std::string& path, const CsvFile& csv) {
  std::ofstream out(path, std::ios::binary);  // binary: LF endings everywhere
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  for (const auto& [key, value] : csv.metadata) out << "# " << key << "=" << value << "\n";
  for (std::size_t c = 0; c < csv.columns.size(); ++c) {
    out << (c ? "," : "") << csv.columns[c];
  }
  out << "\n";
  for (const auto& row : csv.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << (c ? "," : "") << format_double(row[c]);
    }
    out << "\n";
  }
  if (!out) throw std::runtime_error("write_csv: write failed for " + path);
}

namespace detail {

inline double parse_double(const std::string& cell, const std::string& path, std::size_t line) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc{} || res.ptr != last) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": malformed number '" + cell + "'");
  }
  return value;
}

}  // namespace detail

/// Parses a file written by write_csv; malformed content is rejected with the
/// offending line number.
inline CsvFile read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path);
  CsvFile csv;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.front() == '#') {
      std::string body = line.substr(1);
      if (!body.empty() && body.front() == ' ') body.erase(0, 1);
      const auto eq = body.find('=');
      if (eq != std::string::npos) {
        csv.metadata.emplace_back(body.substr(0, eq), body.substr(eq + 1));
      }
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (line.back() == ',') cells.emplace_back();
    if (!have_header) {
      csv.columns = cells;
      have_header = true;
      continue;
    }
    if (cells.size() != csv.columns.size()) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected " +
                               std::to_string(csv.columns.size()) + " cells, got " +
                               std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(detail::parse_double(c, path, lineno));
    csv.rows.push_back(std::move(row));
  }
  if (!have_header) throw std::runtime_error(path + ": missing header row");
  return csv;
}

inline std::string metadata_value(const CsvFile& csv, const std::string& key,
                                  const std::string& fallback = "") {
  for (const auto& [k, v] : csv.metadata) {
    if (k == key) return v;
  }
  return fallback;
}

}  // namespace pdegm
