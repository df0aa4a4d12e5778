#pragma once

#include <string>
#include <vector>

namespace wdeconv::csv {

struct Table
{
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  //! Index of a named column or -1.
  int column(const std::string& name) const;
};

//! Reads a comma separated file with a single header line.
Table read(const std::string& path);

//! Shortest representation that round-trips a double exactly.
std::string format_double(double v);

void write(const std::string& path, const Table& table);

} // namespace wdeconv::csv
