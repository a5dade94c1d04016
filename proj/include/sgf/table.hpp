#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace sgf {

// Named numeric columns plus pass/fail flags. CSV output is deterministic:
// '.' decimal, 17 significant digits, so a parsed table compares equal.
struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::map<std::string, bool> flags;

  int column(const std::string& name) const;
  std::vector<double> col(const std::string& name) const;
  void add_row(std::vector<double> row);
  bool all_flags() const;
};

std::string format_double(double v);
void write_csv(std::ostream& os, const ResultTable& t);
ResultTable read_csv(std::istream& is);
void save_csv(const std::string& path, const ResultTable& t);
ResultTable load_csv(const std::string& path);

}  // namespace sgf
