#pragma once

#include <string>
#include <vector>

namespace wdeconv {

struct PlotSeries
{
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool line = true;    // polyline, otherwise markers
  std::string colour = "#1f77b4";
};

//! Self-contained SVG with log-scaled axes; non-positive points are dropped.
std::string loglog_svg(const std::string& title,
                       const std::string& xlabel,
                       const std::string& ylabel,
                       const std::vector<PlotSeries>& series);

void write_loglog_svg(const std::string& path,
                      const std::string& title,
                      const std::string& xlabel,
                      const std::string& ylabel,
                      const std::vector<PlotSeries>& series);

} // namespace wdeconv
