#include "sgf/table.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace sgf {

int ResultTable::column(const std::string& name) const {
  auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw std::out_of_range("no column " + name);
  return static_cast<int>(it - columns.begin());
}

std::vector<double> ResultTable::col(const std::string& name) const {
  const int c = column(name);
  std::vector<double> out;
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

void ResultTable::add_row(std::vector<double> row) {
  if (row.size() != columns.size()) throw std::invalid_argument("row width does not match columns");
  rows.push_back(std::move(row));
}

bool ResultTable::all_flags() const {
  return std::all_of(flags.begin(), flags.end(), [](const auto& f) { return f.second; });
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(std::ostream& os, const ResultTable& t) {
  for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
  os << '\n';
  for (const auto& r : t.rows) {
    for (std::size_t c = 0; c < r.size(); ++c) os << (c ? "," : "") << format_double(r[c]);
    os << '\n';
  }
}

ResultTable read_csv(std::istream& is) {
  ResultTable t;
  std::string line;
  if (!std::getline(is, line)) return t;
  std::stringstream hs(line);
  for (std::string cell; std::getline(hs, cell, ',');) t.columns.push_back(cell);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) row.push_back(std::strtod(cell.c_str(), nullptr));
    t.add_row(std::move(row));
  }
  return t;
}

void save_csv(const std::string& path, const ResultTable& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open for writing: " + path);
  write_csv(os, t);
  if (!os) throw std::runtime_error("write failed: " + path);
}

ResultTable load_csv(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open for reading: " + path);
  return read_csv(is);
}

}  // namespace sgf
