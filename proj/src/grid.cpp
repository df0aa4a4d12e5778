#include "wdeconv/grid.hpp"
#include "wdeconv/csv.hpp"
#include "wdeconv/errors.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace wdeconv {

GridSpec GridSpec::centered(double half_width, std::size_t length)
{
  if (length < 2 || half_width <= 0.0)
    throw DomainError("centered grid needs length >= 2 and positive width");
  const double step = 2.0 * half_width / static_cast<double>(length);
  return { -static_cast<double>(length / 2) * step, step, length };
}

GridSpec GridSpec::covering(double lo, double hi, std::size_t length)
{
  if (!(hi > lo) || length < 2)
    throw DomainError("covering grid needs hi > lo and length >= 2");
  const double step = (hi - lo) / static_cast<double>(length - 1);
  return { lo, step, length };
}

bool is_power_of_two(std::size_t n)
{
  return n > 0 && (n & (n - 1)) == 0;
}

GridFunction1D::GridFunction1D(const GridSpec& spec, GridKind k)
  : origin(spec.origin)
  , step(spec.step)
  , values(spec.length, 0.0)
  , kind(k)
{
  if (!(step > 0.0))
    throw DomainError("grid step must be positive");
}

GridFunction1D::GridFunction1D(double origin_,
                               double step_,
                               std::vector<double> v,
                               GridKind k)
  : origin(origin_)
  , step(step_)
  , values(std::move(v))
  , kind(k)
{
  if (!(step > 0.0))
    throw DomainError("grid step must be positive");
}

double GridFunction1D::at(double xq) const
{
  if (values.empty())
    return 0.0;
  const double pos = (xq - origin) / step;
  if (pos <= 0.0)
    return values.front();
  const auto last = static_cast<double>(values.size() - 1);
  if (pos >= last)
    return values.back();
  const auto i = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(i);
  return values[i] * (1.0 - frac) + values[i + 1] * frac;
}

bool same_grid(const GridSpec& a, const GridSpec& b, double rel_tol)
{
  if (a.length != b.length)
    return false;
  const double scale = std::max(a.step, b.step);
  return std::abs(a.step - b.step) <= rel_tol * scale &&
         std::abs(a.origin - b.origin) <= 1e-9 * scale;
}

double trapezoid(const GridFunction1D& f)
{
  const auto& v = f.values;
  if (v.size() < 2)
    return 0.0;
  double s = 0.5 * (v.front() + v.back());
  for (std::size_t i = 1; i + 1 < v.size(); ++i)
    s += v[i];
  return s * f.step;
}

double trapezoid_abs(const GridFunction1D& f)
{
  GridFunction1D a = f;
  for (auto& x : a.values)
    x = std::abs(x);
  return trapezoid(a);
}

GridFunction1D cumulative_trapezoid(const GridFunction1D& f)
{
  GridFunction1D out(f.spec(), GridKind::signed_fn);
  double acc = 0.0;
  for (std::size_t i = 1; i < f.size(); ++i) {
    acc += 0.5 * f.step * (f.values[i - 1] + f.values[i]);
    out.values[i] = acc;
  }
  return out;
}

double negative_mass(const GridFunction1D& f)
{
  GridFunction1D neg = f;
  for (auto& x : neg.values)
    x = std::max(0.0, -x);
  return trapezoid(neg);
}

void check_invariants(const GridFunction1D& f, double density_mass_tol)
{
  for (double v : f.values)
    if (!std::isfinite(v))
      throw DomainError("grid values must be finite");
  switch (f.kind) {
    case GridKind::density: {
      for (double v : f.values)
        if (v < -1e-9)
          throw DomainError("density grid has negative values");
      const double mass = trapezoid(f);
      if (std::abs(mass - 1.0) > density_mass_tol)
        throw DomainError("density grid does not integrate to one");
      break;
    }
    case GridKind::cdf: {
      for (std::size_t i = 0; i < f.size(); ++i) {
        if (f.values[i] < -1e-9 || f.values[i] > 1.0 + 1e-9)
          throw DomainError("cdf grid leaves [0, 1]");
        if (i > 0 && f.values[i] < f.values[i - 1] - 1e-12)
          throw DomainError("cdf grid is not nondecreasing");
      }
      break;
    }
    case GridKind::signed_fn:
      break;
  }
}

void write_grid_csv(const std::string& path, const GridFunction1D& f)
{
  csv::Table t;
  t.header = { "x", "value" };
  t.rows.reserve(f.size());
  for (std::size_t i = 0; i < f.size(); ++i)
    t.rows.push_back({ f.x(i), f.values[i] });
  csv::write(path, t);
}

GridFunction1D read_grid_csv(const std::string& path, GridKind kind)
{
  const csv::Table t = csv::read(path);
  const int cx = t.column("x");
  const int cv = t.column("value");
  if (cx < 0 || cv < 0)
    throw IoError(path + ": expected header x,value");
  if (t.rows.size() < 2)
    throw IoError(path + ": need at least two grid rows");
  const double origin = t.rows[0][cx];
  const double step = t.rows[1][cx] - origin;
  std::vector<double> v;
  v.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const double expected = origin + step * static_cast<double>(i);
    if (std::abs(t.rows[i][cx] - expected) > 1e-9 * std::max(1.0, std::abs(expected)))
      throw GridMismatch(path + ": grid is not uniform");
    v.push_back(t.rows[i][cv]);
  }
  return { origin, step, std::move(v), kind };
}

void write_spectrum_csv(const std::string& path, const GridSpectrum& s)
{
  csv::Table t;
  t.header = { "t", "re", "im" };
  for (std::size_t k = 0; k < s.size(); ++k)
    t.rows.push_back({ s.t(k), s.values[k].real(), s.values[k].imag() });
  csv::write(path, t);
}

GridSpectrum read_spectrum_csv(const std::string& path)
{
  const csv::Table t = csv::read(path);
  const int ct = t.column("t"), cr = t.column("re"), ci = t.column("im");
  if (ct < 0 || cr < 0 || ci < 0)
    throw IoError(path + ": expected header t,re,im");
  if (t.rows.size() < 2)
    throw IoError(path + ": need at least two grid rows");
  GridSpectrum s;
  s.origin = t.rows[0][ct];
  s.step = t.rows[1][ct] - s.origin;
  for (const auto& r : t.rows)
    s.values.emplace_back(r[cr], r[ci]);
  return s;
}

namespace csv {

int Table::column(const std::string& name) const
{
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name)
      return static_cast<int>(i);
  return -1;
}

namespace {

std::vector<std::string> split(const std::string& line)
{
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ','))
    out.push_back(cell);
  return out;
}

std::string trim(std::string s)
{
  const auto issp = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && issp(s.back()))
    s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && issp(s[i]))
    ++i;
  return s.substr(i);
}

} // namespace

Table read(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw IoError("cannot open " + path);
  Table t;
  std::string line;
  if (!std::getline(in, line))
    throw IoError(path + ": empty file");
  for (auto& h : split(line))
    t.header.push_back(trim(h));
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty())
      continue;
    auto cells = split(line);
    if (cells.size() != t.header.size())
      throw IoError(path + ":" + std::to_string(lineno) + ": wrong column count");
    std::vector<double> row;
    row.reserve(cells.size());
    for (auto& c : cells) {
      c = trim(c);
      try {
        std::size_t used = 0;
        row.push_back(std::stod(c, &used));
        if (used != c.size())
          throw std::invalid_argument(c);
      } catch (const std::exception&) {
        if (c == "nan")
          row.push_back(std::nan(""));
        else
          throw IoError(path + ":" + std::to_string(lineno) + ": bad number '" + c + "'");
      }
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::string format_double(double v)
{
  if (std::isnan(v))
    return "nan";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write(const std::string& path, const Table& table)
{
  std::ofstream out(path);
  if (!out)
    throw IoError("cannot write " + path);
  for (std::size_t i = 0; i < table.header.size(); ++i)
    out << (i ? "," : "") << table.header[i];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << format_double(row[i]);
    out << '\n';
  }
}

} // namespace csv

} // namespace wdeconv
