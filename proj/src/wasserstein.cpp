#include "wdeconv/wasserstein.hpp"
#include "wdeconv/csv.hpp"
#include "wdeconv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace wdeconv {

EmpiricalMeasure EmpiricalMeasure::uniform(Matrix atoms)
{
  if (atoms.rows == 0)
    throw DomainError("empirical measure needs at least one atom");
  EmpiricalMeasure m;
  m.weights.assign(atoms.rows, 1.0 / static_cast<double>(atoms.rows));
  m.atoms = std::move(atoms);
  return m;
}

EmpiricalMeasure EmpiricalMeasure::uniform_1d(const std::vector<double>& points)
{
  Matrix a(points.size(), 1);
  a.data = points;
  return uniform(std::move(a));
}

EmpiricalMeasure EmpiricalMeasure::weighted_1d(const std::vector<double>& points,
                                               std::vector<double> weights)
{
  if (points.size() != weights.size())
    throw DomainError("points and weights differ in length");
  EmpiricalMeasure m;
  m.atoms = Matrix(points.size(), 1);
  m.atoms.data = points;
  m.weights = std::move(weights);
  validate(m);
  return m;
}

void validate(const EmpiricalMeasure& m)
{
  if (m.size() == 0 || m.dim() == 0)
    throw DomainError("empirical measure needs at least one atom");
  if (m.weights.size() != m.size())
    throw DomainError("one weight per atom required");
  double total = 0.0;
  for (double w : m.weights) {
    if (!(w >= 0.0))
      throw DomainError("weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw DomainError("weights must sum to one");
  for (double x : m.atoms.data)
    if (!std::isfinite(x))
      throw DomainError("atoms must be finite");
}

double w1_empirical_1d(const EmpiricalMeasure& p, const EmpiricalMeasure& q)
{
  if (p.dim() != 1 || q.dim() != 1)
    throw DimensionError("w1_empirical_1d needs one-dimensional measures");
  std::vector<std::pair<double, double>> pts;
  pts.reserve(p.size() + q.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    pts.emplace_back(p.atoms.data[i], p.weights[i]);
  for (std::size_t i = 0; i < q.size(); ++i)
    pts.emplace_back(q.atoms.data[i], -q.weights[i]);
  std::sort(pts.begin(), pts.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  double diff = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    diff += pts[i].second;
    total += std::abs(diff) * (pts[i + 1].first - pts[i].first);
  }
  return total;
}

W1CdfResult w1_cdf_report(const GridFunction1D& f, const GridFunction1D& g)
{
  if (!same_grid(f.spec(), g.spec()))
    throw GridMismatch("w1_cdf needs both CDFs on the same grid");
  GridFunction1D d = f;
  for (std::size_t i = 0; i < d.size(); ++i)
    d.values[i] = std::abs(f.values[i] - g.values[i]);
  W1CdfResult r;
  r.value = trapezoid(d);
  if (!d.values.empty()) {
    r.left_tail_flag = d.values.front() > 1e-3;
    r.right_tail_flag = d.values.back() > 1e-3;
  }
  return r;
}

double w1_cdf(const GridFunction1D& f, const GridFunction1D& g)
{
  return w1_cdf_report(f, g).value;
}

EmpiricalMeasure project_measure(const EmpiricalMeasure& p, const std::vector<double>& v)
{
  if (v.size() != p.dim())
    throw DimensionError("direction and measure differ in dimension");
  double norm2 = 0.0;
  for (double c : v)
    norm2 += c * c;
  if (std::abs(std::sqrt(norm2) - 1.0) > 1e-9)
    throw NotUnitVector("projection direction must have unit norm");
  EmpiricalMeasure out;
  out.atoms = Matrix(p.size(), 1);
  for (std::size_t i = 0; i < p.size(); ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < p.dim(); ++j)
      s += v[j] * p.atoms(i, j);
    out.atoms.data[i] = s;
  }
  out.weights = p.weights;
  return out;
}

SlicedResult max_sliced_w1(const EmpiricalMeasure& p,
                           const EmpiricalMeasure& q,
                           const DirectionNet& net)
{
  if (p.dim() != q.dim() || net.dim() != p.dim())
    throw DimensionError("measures and net must share a dimension");
  SlicedResult best;
  best.value = -1.0;
  for (std::size_t k = 0; k < net.directions.size(); ++k) {
    const double w = w1_empirical_1d(project_measure(p, net.directions[k]),
                                     project_measure(q, net.directions[k]));
    if (w > best.value) {
      best.value = w;
      best.argmax_index = k;
    }
  }
  best.argmax = net.directions.at(best.argmax_index);
  return best;
}

namespace {

// Successive shortest paths on the bipartite transport network. Every
// augmentation saturates a residual arc, so the loop ends after finitely many
// steps with an optimal flow.
double min_cost_transport(const std::vector<double>& supply,
                          const std::vector<double>& demand,
                          const std::vector<std::vector<double>>& cost)
{
  const std::size_t n = supply.size(), m = demand.size();
  const std::size_t source = n + m, sink = n + m + 1, nodes = n + m + 2;
  struct Arc
  {
    std::size_t to;
    double cap;
    double cost;
    std::size_t rev;
  };
  std::vector<std::vector<Arc>> g(nodes);
  const auto add = [&](std::size_t a, std::size_t b, double cap, double c) {
    g[a].push_back({ b, cap, c, g[b].size() });
    g[b].push_back({ a, 0.0, -c, g[a].size() - 1 });
  };
  const double inf_cap = 4.0;
  for (std::size_t i = 0; i < n; ++i)
    add(source, i, supply[i], 0.0);
  for (std::size_t j = 0; j < m; ++j)
    add(n + j, sink, demand[j], 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j)
      add(i, n + j, inf_cap, cost[i][j]);

  constexpr double eps = 1e-15;
  double total = 0.0;
  for (;;) {
    std::vector<double> dist(nodes, std::numeric_limits<double>::infinity());
    std::vector<std::size_t> prev_node(nodes), prev_arc(nodes);
    dist[source] = 0.0;
    for (std::size_t iter = 0; iter < nodes; ++iter) {
      bool changed = false;
      for (std::size_t u = 0; u < nodes; ++u) {
        if (!std::isfinite(dist[u]))
          continue;
        for (std::size_t a = 0; a < g[u].size(); ++a) {
          const Arc& e = g[u][a];
          if (e.cap > eps && dist[u] + e.cost < dist[e.to] - 1e-14) {
            dist[e.to] = dist[u] + e.cost;
            prev_node[e.to] = u;
            prev_arc[e.to] = a;
            changed = true;
          }
        }
      }
      if (!changed)
        break;
    }
    if (!std::isfinite(dist[sink]))
      break;
    double push = std::numeric_limits<double>::infinity();
    for (std::size_t v = sink; v != source; v = prev_node[v])
      push = std::min(push, g[prev_node[v]][prev_arc[v]].cap);
    for (std::size_t v = sink; v != source; v = prev_node[v]) {
      Arc& e = g[prev_node[v]][prev_arc[v]];
      e.cap -= push;
      g[v][e.rev].cap += push;
    }
    total += push * dist[sink];
  }
  return total;
}

} // namespace

double exact_w1_small(const EmpiricalMeasure& p, const EmpiricalMeasure& q)
{
  if (p.size() + q.size() > exact_w1_atom_cap)
    throw TooLarge("exact_w1_small accepts at most 64 atoms in total");
  if (p.dim() != q.dim())
    throw DimensionError("measures differ in dimension");
  std::vector<std::vector<double>> cost(p.size(), std::vector<double>(q.size()));
  for (std::size_t i = 0; i < p.size(); ++i)
    for (std::size_t j = 0; j < q.size(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < p.dim(); ++k) {
        const double d = p.atoms(i, k) - q.atoms(j, k);
        s += d * d;
      }
      cost[i][j] = std::sqrt(s);
    }
  return min_cost_transport(p.weights, q.weights, cost);
}

DirectionNet build_direction_net(std::size_t d, double delta)
{
  if (!(delta > 0.0 && delta < 1.0))
    throw DomainError("net resolution must lie in (0, 1)");
  DirectionNet net;
  net.resolution = delta;
  if (d == 1) {
    net.directions = { { 1.0 }, { -1.0 } };
  } else if (d == 2) {
    const auto count = static_cast<std::size_t>(std::ceil(2.0 * std::numbers::pi / delta));
    for (std::size_t k = 0; k < count; ++k) {
      const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(count);
      net.directions.push_back({ std::cos(a), std::sin(a) });
    }
  } else if (d == 3) {
    const auto count = static_cast<std::size_t>(std::ceil(8.0 / (delta * delta)));
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (std::size_t k = 0; k < count; ++k) {
      const double z = 1.0 - (2.0 * static_cast<double>(k) + 1.0) / static_cast<double>(count);
      const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double a = golden * static_cast<double>(k);
      std::vector<double> v = { r * std::cos(a), r * std::sin(a), z };
      const double norm = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
      for (auto& c : v)
        c /= norm;
      net.directions.push_back(std::move(v));
    }
  } else {
    throw Unsupported("direction nets are implemented for d <= 3");
  }
  return net;
}

void write_measure_csv(const std::string& path, const EmpiricalMeasure& m)
{
  csv::Table t;
  for (std::size_t j = 0; j < m.dim(); ++j)
    t.header.push_back("x" + std::to_string(j + 1));
  t.header.push_back("weight");
  for (std::size_t i = 0; i < m.size(); ++i) {
    std::vector<double> row;
    for (std::size_t j = 0; j < m.dim(); ++j)
      row.push_back(m.atoms(i, j));
    row.push_back(m.weights[i]);
    t.rows.push_back(std::move(row));
  }
  csv::write(path, t);
}

EmpiricalMeasure read_measure_csv(const std::string& path)
{
  const csv::Table t = csv::read(path);
  std::vector<int> cols;
  for (std::size_t j = 1;; ++j) {
    const int c = t.column("x" + std::to_string(j));
    if (c < 0)
      break;
    cols.push_back(c);
  }
  if (cols.empty())
    throw IoError(path + ": expected columns x1..xd");
  if (t.rows.empty())
    throw IoError(path + ": no atoms");
  const int cw = t.column("weight");
  EmpiricalMeasure m;
  m.atoms = Matrix(t.rows.size(), cols.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      m.atoms(i, j) = t.rows[i][cols[j]];
  if (cw >= 0) {
    for (const auto& r : t.rows)
      m.weights.push_back(r[cw]);
  } else {
    m.weights.assign(t.rows.size(), 1.0 / static_cast<double>(t.rows.size()));
  }
  validate(m);
  return m;
}

} // namespace wdeconv
