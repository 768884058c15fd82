#include "msf/csv.hpp"

#include <charconv>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "msf/errors.hpp"

namespace msf {

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& path, int lineno) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(path + ":" + std::to_string(lineno) + ": cannot parse number '" + s + "'");
  }
}

}  // namespace

CsvSeries read_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open CSV file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + ": empty file");
  auto header = split_line(line);
  if (header.empty() || header[0] != "y")
    throw ConfigError(path + ":1: header must start with 'y'");
  const int ncov = static_cast<int>(header.size()) - 1;
  for (int j = 0; j < ncov; ++j)
    if (header[1 + j] != "x" + std::to_string(j + 1))
      throw ConfigError(path + ":1: expected column 'x" + std::to_string(j + 1) + "', got '" +
                        header[1 + j] + "'");

  CsvSeries s;
  s.ncov = ncov;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (static_cast<int>(cells.size()) != ncov + 1)
      throw ConfigError(path + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(ncov + 1) + " columns, got " +
                        std::to_string(cells.size()));
    s.y.push_back(parse_double(cells[0], path, lineno));
    for (int j = 0; j < ncov; ++j) s.x.push_back(parse_double(cells[1 + j], path, lineno));
  }
  if (s.y.empty()) throw ConfigError(path + ": no data rows");
  return s;
}

void write_series_csv(const std::string& path, const Vec& y, const Vec& x, int ncov) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open CSV file for writing: " + path);
  out << "y";
  for (int j = 0; j < ncov; ++j) out << ",x" << (j + 1);
  out << "\n";
  char buf[64];
  const int n = static_cast<int>(y.size());
  for (int t = 0; t < n; ++t) {
    std::snprintf(buf, sizeof buf, "%.17g", y[t]);
    out << buf;
    for (int j = 0; j < ncov; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", x[(size_t)t * ncov + j]);
      out << ',' << buf;
    }
    out << "\n";
  }
  if (!out) throw ConfigError("short write to CSV file: " + path);
}

}  // namespace msf
