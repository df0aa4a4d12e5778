#include "wdeconv/svg_plot.hpp"
#include "wdeconv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace wdeconv {

namespace {

constexpr double width = 640.0, height = 440.0;
constexpr double left = 70.0, right = 170.0, top = 40.0, bottom = 60.0;

std::string escape(const std::string& s)
{
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

} // namespace

std::string loglog_svg(const std::string& title,
                       const std::string& xlabel,
                       const std::string& ylabel,
                       const std::vector<PlotSeries>& series)
{
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series)
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0))
        continue;
      x0 = std::min(x0, std::log10(s.x[i]));
      x1 = std::max(x1, std::log10(s.x[i]));
      y0 = std::min(y0, std::log10(s.y[i]));
      y1 = std::max(y1, std::log10(s.y[i]));
    }
  if (!std::isfinite(x0)) {
    x0 = y0 = 0.0;
    x1 = y1 = 1.0;
  }
  if (x1 - x0 < 1e-9) {
    x0 -= 0.5;
    x1 += 0.5;
  }
  if (y1 - y0 < 1e-9) {
    y0 -= 0.5;
    y1 += 0.5;
  }
  const double pw = width - left - right, ph = height - top - bottom;
  const auto px = [&](double v) { return left + (std::log10(v) - x0) / (x1 - x0) * pw; };
  const auto py = [&](double v) { return top + (y1 - std::log10(v)) / (y1 - y0) * ph; };

  std::ostringstream o;
  o.precision(6);
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
    << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\">"
    << escape(title) << "</text>\n"
    << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
    << "\" fill=\"none\" stroke=\"black\"/>\n";
  // decade ticks
  for (int e = static_cast<int>(std::ceil(x0)); e <= static_cast<int>(std::floor(x1)); ++e) {
    const double x = left + (e - x0) / (x1 - x0) * pw;
    o << "<line x1=\"" << x << "\" y1=\"" << top + ph << "\" x2=\"" << x << "\" y2=\"" << top + ph + 5
      << "\" stroke=\"black\"/><text x=\"" << x << "\" y=\"" << top + ph + 18
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">1e" << e << "</text>\n";
  }
  for (int e = static_cast<int>(std::ceil(y0)); e <= static_cast<int>(std::floor(y1)); ++e) {
    const double y = top + (y1 - e) / (y1 - y0) * ph;
    o << "<line x1=\"" << left - 5 << "\" y1=\"" << y << "\" x2=\"" << left << "\" y2=\"" << y
      << "\" stroke=\"black\"/><text x=\"" << left - 8 << "\" y=\"" << y + 4
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e" << e << "</text>\n";
  }
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 15
    << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << escape(xlabel) << "</text>\n"
    << "<text x=\"18\" y=\"" << top + ph / 2 << "\" transform=\"rotate(-90 18 " << top + ph / 2
    << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << escape(ylabel) << "</text>\n";

  double legend_y = top + 10;
  for (const auto& s : series) {
    o << "<g class=\"series\" data-label=\"" << escape(s.label) << "\">\n";
    std::ostringstream pts;
    pts.precision(6);
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!(s.x[i] > 0.0) || !(s.y[i] > 0.0))
        continue;
      if (s.line)
        pts << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
      else
        o << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"4\" fill=\"" << s.colour
          << "\"/>\n";
    }
    if (s.line)
      o << "<polyline points=\"" << pts.str() << "\" fill=\"none\" stroke=\"" << s.colour
        << "\" stroke-width=\"2\"/>\n";
    o << "</g>\n";
    o << "<rect x=\"" << width - right + 12 << "\" y=\"" << legend_y - 8 << "\" width=\"12\" height=\"12\" fill=\""
      << s.colour << "\"/><text x=\"" << width - right + 30 << "\" y=\"" << legend_y + 2
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << escape(s.label) << "</text>\n";
    legend_y += 20;
  }
  o << "</svg>\n";
  return o.str();
}

void write_loglog_svg(const std::string& path,
                      const std::string& title,
                      const std::string& xlabel,
                      const std::string& ylabel,
                      const std::vector<PlotSeries>& series)
{
  std::ofstream f(path);
  if (!f)
    throw IoError("cannot write " + path);
  f << loglog_svg(title, xlabel, ylabel, series);
  if (!f)
    throw IoError("write failed for " + path);
}

} // namespace wdeconv
