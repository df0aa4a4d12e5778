#include "wdeconv/deconv_kde.hpp"
#include "wdeconv/errors.hpp"
#include "wdeconv/fourier.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>

namespace wdeconv {

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point start)
{
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

std::vector<double> project_rows(const Matrix& Y, const std::vector<double>& v)
{
  if (v.size() != Y.cols)
    throw DimensionError("direction and sample differ in dimension");
  std::vector<double> p(Y.rows, 0.0);
  for (std::size_t i = 0; i < Y.rows; ++i)
    for (std::size_t j = 0; j < Y.cols; ++j)
      p[i] += v[j] * Y(i, j);
  return p;
}

// Empirical CF at t = k dt for k = 0..kmax by the recurrence e^{i(k+1)dt p} =
// e^{ik dt p} e^{i dt p}.
std::vector<cplx> empirical_cf_uniform(const std::vector<double>& p, double dt, std::size_t kmax)
{
  std::vector<cplx> acc(kmax + 1, cplx(0.0, 0.0));
  for (double x : p) {
    const cplx z(std::cos(dt * x), std::sin(dt * x));
    cplx w(1.0, 0.0);
    for (std::size_t k = 0; k <= kmax; ++k) {
      acc[k] += w;
      w *= z;
    }
  }
  const double inv = 1.0 / static_cast<double>(p.size());
  for (auto& a : acc)
    a *= inv;
  acc[0] = 1.0;
  return acc;
}

double sample_sd(const std::vector<double>& p)
{
  const double n = static_cast<double>(p.size());
  const double m = std::accumulate(p.begin(), p.end(), 0.0) / n;
  double s = 0.0;
  for (double x : p)
    s += (x - m) * (x - m);
  return p.size() > 1 ? std::sqrt(s / (n - 1.0)) : 0.0;
}

Matrix column_matrix(const std::vector<double>& y)
{
  Matrix m(y.size(), 1);
  m.data = y;
  return m;
}

void check_smoothness(const NoiseModel& model, const KernelSpec& kernel, double b)
{
  const double band = kernel.support() / b;
  std::vector<double> ts;
  for (int k = 0; k <= 200; ++k)
    ts.push_back(band * (k / 100.0 - 1.0));
  if (!verify_ordinary_smooth(model, ts).pass)
    throw PreconditionViolated("noise model fails the ordinary-smoothness check on the band");
}

} // namespace

void validate(const DeconvConfig& cfg)
{
  if (!is_power_of_two(cfg.grid.length))
    throw ConfigError("grid length must be a power of two");
  if (!(cfg.grid.step > 0.0))
    throw ConfigError("grid step must be positive");
  if (cfg.dimension != 1 && cfg.dimension != 2)
    throw ConfigError("dimension must be 1 or 2");
  if (cfg.rule == BandwidthRule::Fixed && !(cfg.bandwidth > 0.0 && cfg.bandwidth <= 1.0))
    throw ConfigError("explicit bandwidth must lie in (0, 1]");
  if (!(cfg.direction_net_resolution > 0.0 && cfg.direction_net_resolution < 1.0))
    throw ConfigError("direction net resolution must lie in (0, 1)");
  if (!is_power_of_two(cfg.surrogate_grid_length))
    throw ConfigError("surrogate grid length must be a power of two");
}

InverseFilter InverseFilter::from_noise(const NoiseModel& model)
{
  validate(model);
  InverseFilter f;
  f.reciprocal = [model](double t) { return reciprocal_cf(model, t, 0); };
  f.mean = model.mean();
  f.beta = model.beta();
  return f;
}

InverseFilter InverseFilter::identity()
{
  InverseFilter f;
  f.reciprocal = [](double) { return cplx(1.0, 0.0); };
  return f;
}

std::vector<cplx> empirical_cf(const Matrix& Y,
                               const std::vector<double>& t_grid,
                               const std::vector<double>& v)
{
  if (Y.rows == 0)
    throw DomainError("empirical CF needs at least one observation");
  const auto p = project_rows(Y, v);
  std::vector<cplx> out(t_grid.size());
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    const double t = t_grid[k];
    if (t == 0.0) {
      out[k] = 1.0;
      continue;
    }
    double c = 0.0, s = 0.0;
    for (double x : p) {
      c += std::cos(t * x);
      s += std::sin(t * x);
    }
    out[k] = cplx(c, s) / static_cast<double>(p.size());
  }
  return out;
}

double default_bandwidth(std::size_t n, double beta, std::size_t d, BandwidthRule variant)
{
  if (n < 2)
    throw DomainError("bandwidth rules need n >= 2");
  const double nn = static_cast<double>(n);
  const double dd = static_cast<double>(d);
  switch (variant) {
    case BandwidthRule::Plain: return std::pow(nn, -1.0 / (2.0 * beta * dd + 1.0));
    case BandwidthRule::Logged: {
      const double l = std::log(nn);
      return std::min(1.0, std::pow(nn / (l * l * l), -1.0 / (4.0 * dd + 1.0)));
    }
    default: throw DomainError("default_bandwidth needs the plain or logged rule");
  }
}

double resolve_bandwidth(const DeconvConfig& cfg, std::size_t n, const NoiseModel& model)
{
  switch (cfg.rule) {
    case BandwidthRule::Fixed: return cfg.bandwidth;
    case BandwidthRule::Plain:
    case BandwidthRule::Logged:
      return default_bandwidth(n, model.beta(), cfg.dimension, cfg.rule);
    case BandwidthRule::Auto:
      return default_bandwidth(n, model.beta(), cfg.dimension,
                               model.kind == NoiseKind::Laplace ? BandwidthRule::Logged
                                                                : BandwidthRule::Plain);
  }
  return cfg.bandwidth;
}

GridSpectrum estimator_spectrum(const Matrix& Y,
                                const InverseFilter& filter,
                                const KernelSpec& kernel,
                                double b,
                                const GridSpec& grid,
                                const std::vector<double>& v)
{
  if (!(b > 0.0))
    throw DomainError("bandwidth must be positive");
  if (v.size() != Y.cols)
    throw DimensionError("direction and sample differ in dimension");
  double vmax = 0.0;
  for (double c : v)
    vmax = std::max(vmax, std::abs(c));
  const double band = kernel.support() / (b * vmax);
  if (band >= nyquist(grid))
    throw BandTooWide("active band " + std::to_string(band) + " exceeds the grid Nyquist frequency");

  GridSpectrum s = frequency_grid(grid);
  const std::size_t centre = grid.length / 2;
  const auto kmax = static_cast<std::size_t>(std::floor(band / s.step));
  const auto phi = empirical_cf_uniform(project_rows(Y, v), s.step, kmax);
  for (std::size_t k = 0; k <= kmax; ++k) {
    const double t = static_cast<double>(k) * s.step;
    double kern = 1.0;
    cplx rec = 1.0;
    for (double c : v) {
      kern *= spectrum(kernel, b * c * t);
      rec *= filter.reciprocal(c * t);
    }
    const cplx val = kern * phi[k] * rec;
    s.values[centre + k] = val;
    if (k > 0)
      s.values[centre - k] = std::conj(val);
  }
  return s;
}

GridFunction1D deconvolve_density_1d(const std::vector<double>& Y,
                                     const InverseFilter& filter,
                                     const DeconvConfig& cfg,
                                     double bandwidth)
{
  const GridSpectrum s =
    estimator_spectrum(column_matrix(Y), filter, cfg.kernel, bandwidth, cfg.grid, { 1.0 });
  return grid_ifft(s, cfg.grid.origin, GridKind::signed_fn, cfg.imag_tolerance);
}

GridFunction1D deconvolve_density_1d(const std::vector<double>& Y,
                                     const NoiseModel& model,
                                     const DeconvConfig& cfg)
{
  validate(cfg);
  const double b = resolve_bandwidth(cfg, Y.size(), model);
  check_smoothness(model, cfg.kernel, b);
  return deconvolve_density_1d(Y, InverseFilter::from_noise(model), cfg, b);
}

GridFunction1D sliced_raw_cdf(const Matrix& Y,
                              const InverseFilter& filter,
                              const DeconvConfig& cfg,
                              double bandwidth,
                              const std::vector<double>& v)
{
  const GridSpectrum s = estimator_spectrum(Y, filter, cfg.kernel, bandwidth, cfg.grid, v);
  const auto p = project_rows(Y, v);
  double mean = std::accumulate(p.begin(), p.end(), 0.0) / static_cast<double>(p.size());
  for (double c : v)
    mean -= c * filter.mean;
  const double sd = std::max(sample_sd(p), 8.0 * cfg.grid.step);
  return cdf_from_spectrum(cfg.grid, s, mean, sd);
}

GridFunction1D sliced_raw_cdf(const Matrix& Y,
                              const NoiseModel& model,
                              const DeconvConfig& cfg,
                              const std::vector<double>& v)
{
  validate(cfg);
  const double b = resolve_bandwidth(cfg, Y.rows, model);
  return sliced_raw_cdf(Y, InverseFilter::from_noise(model), cfg, b, v);
}

std::vector<double> isotonic_l1(const std::vector<double>& y)
{
  struct Block
  {
    std::vector<double> sorted;
    double median;
    std::size_t count;
  };
  const auto median_of = [](const std::vector<double>& s) {
    const std::size_t n = s.size();
    return n % 2 ? s[n / 2] : 0.5 * (s[n / 2 - 1] + s[n / 2]);
  };
  std::vector<Block> blocks;
  for (double v : y) {
    blocks.push_back({ { v }, v, 1 });
    while (blocks.size() > 1 && blocks[blocks.size() - 2].median > blocks.back().median) {
      Block top = std::move(blocks.back());
      blocks.pop_back();
      Block& prev = blocks.back();
      std::vector<double> merged;
      merged.reserve(prev.sorted.size() + top.sorted.size());
      std::merge(prev.sorted.begin(), prev.sorted.end(), top.sorted.begin(), top.sorted.end(),
                 std::back_inserter(merged));
      prev.sorted = std::move(merged);
      prev.count += top.count;
      prev.median = median_of(prev.sorted);
    }
  }
  std::vector<double> out;
  out.reserve(y.size());
  for (const auto& b : blocks)
    out.insert(out.end(), b.count, b.median);
  return out;
}

GridFunction1D project_to_cdf(const GridFunction1D& raw, double /*tol*/)
{
  GridFunction1D out = raw;
  out.kind = GridKind::cdf;
  const std::size_t n = raw.size();
  if (n == 0)
    return out;
  if (n == 1) {
    out.values[0] = 1.0;
    return out;
  }
  // end values are pinned; the interior is an unconstrained L1 isotonic fit
  // clipped to [0, 1], which is optimal for the box-constrained problem
  std::vector<double> interior(raw.values.begin() + 1, raw.values.end() - 1);
  interior = isotonic_l1(interior);
  out.values.front() = 0.0;
  out.values.back() = 1.0;
  for (std::size_t i = 0; i < interior.size(); ++i)
    out.values[i + 1] = std::clamp(interior[i], 0.0, 1.0);
  return out;
}

namespace {

EmpiricalMeasure measure_from_cdf(const GridFunction1D& F)
{
  std::vector<double> pts, w;
  double prev = 0.0;
  for (std::size_t i = 0; i < F.size(); ++i) {
    const double inc = F.values[i] - prev;
    prev = F.values[i];
    if (inc > 0.0) {
      pts.push_back(F.x(i));
      w.push_back(inc);
    }
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w)
    x /= total;
  EmpiricalMeasure m;
  m.atoms = Matrix(pts.size(), 1);
  m.atoms.data = std::move(pts);
  m.weights = std::move(w);
  return m;
}

double abs_linear_integral(double fa, double fc, double len)
{
  if (fa * fc >= 0.0)
    return 0.5 * (std::abs(fa) + std::abs(fc)) * len;
  return 0.5 * len * (fa * fa + fc * fc) / (std::abs(fa) + std::abs(fc));
}

// Euclidean projection onto the probability simplex.
void project_simplex(std::vector<double>& w)
{
  std::vector<double> u(w);
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cum += u[k];
    const double t = (cum - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0)
      theta = t;
  }
  for (auto& x : w)
    x = std::max(0.0, x - theta);
}

struct SurrogateResult
{
  EmpiricalMeasure measure;
  int iterations = 0;
  double objective = 0.0;
  double negative_mass = 0.0;
};

// Global measure for d = 2 on a tensor grid: start from the clipped 2-D
// inversion and lower the max-sliced L1 distance to the raw sliced CDFs by
// projected subgradient steps.
SurrogateResult surrogate_measure(const Matrix& Y,
                                  const InverseFilter& filter,
                                  const DeconvConfig& cfg,
                                  double b,
                                  const std::vector<DirectionEstimate>& dirs)
{
  const std::size_t L = cfg.surrogate_grid_length;
  const GridSpec g2 = GridSpec::centered(cfg.surrogate_half_width, L);
  const double band = cfg.kernel.support() / b;
  if (band >= nyquist(g2))
    throw BandTooWide("surrogate grid does not resolve the active band");
  const GridSpectrum axis = frequency_grid(g2);
  const auto kmax = static_cast<long>(std::floor(band / axis.step));
  const long K = 2 * kmax + 1;

  // empirical CF on the active square via per-axis power tables
  std::vector<cplx> phi(static_cast<std::size_t>(K * K), cplx(0.0, 0.0));
  std::vector<cplx> p1(K), p2(K);
  for (std::size_t i = 0; i < Y.rows; ++i) {
    for (int axis_id = 0; axis_id < 2; ++axis_id) {
      auto& p = axis_id == 0 ? p1 : p2;
      const double y = Y(i, axis_id);
      const cplx z(std::cos(axis.step * y), std::sin(axis.step * y));
      cplx w = std::pow(std::conj(z), static_cast<double>(kmax));
      for (long k = 0; k < K; ++k) {
        p[k] = w;
        w *= z;
      }
    }
    for (long a = 0; a < K; ++a)
      for (long c = 0; c < K; ++c)
        phi[a * K + c] += p1[a] * p2[c];
  }
  std::vector<cplx> spec(L * L, cplx(0.0, 0.0));
  const long centre = static_cast<long>(L / 2);
  for (long a = 0; a < K; ++a)
    for (long c = 0; c < K; ++c) {
      const double t1 = (a - kmax) * axis.step, t2 = (c - kmax) * axis.step;
      const cplx v = phi[a * K + c] / static_cast<double>(Y.rows) *
                     spectrum(cfg.kernel, b * t1) * spectrum(cfg.kernel, b * t2) *
                     filter.reciprocal(t1) * filter.reciprocal(t2);
      spec[static_cast<std::size_t>((centre + a - kmax) * static_cast<long>(L) + centre + c - kmax)] = v;
    }
  const auto dens = grid_ifft_2d(g2, spec);

  SurrogateResult res;
  const double cell = g2.step * g2.step;
  std::vector<double> w(L * L);
  Matrix atoms(L * L, 2);
  for (std::size_t a = 0; a < L; ++a)
    for (std::size_t c = 0; c < L; ++c) {
      const std::size_t idx = a * L + c;
      atoms(idx, 0) = g2.x(a);
      atoms(idx, 1) = g2.x(c);
      res.negative_mass += std::max(0.0, -dens[idx]) * cell;
      w[idx] = std::max(0.0, dens[idx]);
    }
  double total = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(total > 0.0))
    std::fill(w.begin(), w.end(), 1.0), total = static_cast<double>(w.size());
  for (auto& x : w)
    x /= total;

  const GridSpec& g1 = cfg.grid;
  const std::size_t N = g1.length;
  std::vector<std::vector<std::size_t>> bucket(dirs.size(), std::vector<std::size_t>(w.size()));
  for (std::size_t d = 0; d < dirs.size(); ++d)
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double p = dirs[d].direction[0] * atoms(i, 0) + dirs[d].direction[1] * atoms(i, 1);
      const double pos = std::ceil((p - g1.origin) / g1.step);
      bucket[d][i] = static_cast<std::size_t>(std::clamp(pos, 0.0, static_cast<double>(N - 1)));
    }

  std::vector<double> F(N), sgn(N);
  const auto evaluate = [&](const std::vector<double>& wt, std::size_t& argmax) {
    double best = -1.0;
    for (std::size_t d = 0; d < dirs.size(); ++d) {
      std::fill(F.begin(), F.end(), 0.0);
      for (std::size_t i = 0; i < wt.size(); ++i)
        F[bucket[d][i]] += wt[i];
      double acc = 0.0, dist = 0.0;
      for (std::size_t k = 0; k < N; ++k) {
        acc += F[k];
        dist += std::abs(acc - dirs[d].raw_cdf.values[k]) * g1.step;
      }
      if (dist > best) {
        best = dist;
        argmax = d;
      }
    }
    return best;
  };

  std::size_t arg = 0;
  double current = evaluate(w, arg);
  double best_val = current;
  std::vector<double> best_w = w;
  std::vector<double> history{ best_val };
  const double slack = 1.0 / std::sqrt(static_cast<double>(Y.rows));
  const double step0 = 0.5 * *std::max_element(w.begin(), w.end());
  int it = 0;
  for (; it < cfg.surrogate_max_iterations; ++it) {
    // subgradient along the maximising direction: suffix sums of sign(F - R)
    const auto& dir = dirs[arg];
    std::fill(F.begin(), F.end(), 0.0);
    for (std::size_t i = 0; i < w.size(); ++i)
      F[bucket[arg][i]] += w[i];
    double acc = 0.0;
    for (std::size_t k = 0; k < N; ++k) {
      acc += F[k];
      const double diff = acc - dir.raw_cdf.values[k];
      sgn[k] = diff > 0.0 ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
    }
    for (std::size_t k = N - 1; k-- > 0;)
      sgn[k] += sgn[k + 1];
    double gmax = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i)
      gmax = std::max(gmax, std::abs(sgn[bucket[arg][i]]));
    if (gmax == 0.0)
      break;
    const double eta = step0 / (gmax * std::sqrt(static_cast<double>(it + 1)));
    for (std::size_t i = 0; i < w.size(); ++i)
      w[i] -= eta * sgn[bucket[arg][i]];
    project_simplex(w);
    current = evaluate(w, arg);
    if (current < best_val) {
      best_val = current;
      best_w = w;
    }
    history.push_back(best_val);
    if (history.size() > 10 && history[history.size() - 11] - best_val < slack)
      break;
  }
  res.iterations = it;
  res.objective = best_val;
  res.measure.atoms = std::move(atoms);
  res.measure.weights = std::move(best_w);
  const double s = std::accumulate(res.measure.weights.begin(), res.measure.weights.end(), 0.0);
  for (auto& x : res.measure.weights)
    x /= s;
  return res;
}

} // namespace

DeconvEstimate deconvolve(const Matrix& Y,
                          const InverseFilter& filter,
                          const DeconvConfig& cfg,
                          double bandwidth)
{
  const auto start = std::chrono::steady_clock::now();
  validate(cfg);
  if (Y.rows == 0)
    throw DomainError("deconvolution needs at least one observation");
  if (Y.cols != cfg.dimension)
    throw DimensionError("sample dimension does not match the configuration");
  DeconvEstimate est;
  est.dimension = cfg.dimension;
  est.bandwidth = bandwidth;

  if (cfg.dimension == 1) {
    const GridSpectrum s = estimator_spectrum(Y, filter, cfg.kernel, bandwidth, cfg.grid, { 1.0 });
    est.raw_density = grid_ifft(s, cfg.grid.origin, GridKind::signed_fn, cfg.imag_tolerance);
    est.raw_cdf = sliced_raw_cdf(Y, filter, cfg, bandwidth, { 1.0 });
    est.projected_cdf = project_to_cdf(est.raw_cdf, cfg.projection_tolerance);
    est.measure = measure_from_cdf(est.projected_cdf);
    est.diagnostics.negative_mass = negative_mass(est.raw_density);
    est.diagnostics.projection_distance = w1_cdf(est.raw_cdf, est.projected_cdf);
  } else {
    const DirectionNet net = build_direction_net(2, cfg.direction_net_resolution);
    double proj = 0.0;
    for (const auto& v : net.directions) {
      DirectionEstimate d;
      d.direction = v;
      d.raw_cdf = sliced_raw_cdf(Y, filter, cfg, bandwidth, v);
      d.projected_cdf = project_to_cdf(d.raw_cdf, cfg.projection_tolerance);
      proj = std::max(proj, w1_cdf(d.raw_cdf, d.projected_cdf));
      est.per_direction.push_back(std::move(d));
    }
    est.raw_cdf = est.per_direction.front().raw_cdf;
    est.projected_cdf = est.per_direction.front().projected_cdf;
    est.diagnostics.projection_distance = proj;
    SurrogateResult sur = surrogate_measure(Y, filter, cfg, bandwidth, est.per_direction);
    est.measure = std::move(sur.measure);
    est.diagnostics.surrogate = true;
    est.diagnostics.surrogate_iterations = sur.iterations;
    est.diagnostics.surrogate_objective = sur.objective;
    est.diagnostics.negative_mass = sur.negative_mass;
  }
  est.diagnostics.runtime_ms = elapsed_ms(start);
  return est;
}

DeconvEstimate deconvolve(const Matrix& Y, const NoiseModel& model, const DeconvConfig& cfg)
{
  validate(cfg);
  const double b = resolve_bandwidth(cfg, Y.rows, model);
  check_smoothness(model, cfg.kernel, b);
  return deconvolve(Y, InverseFilter::from_noise(model), cfg, b);
}

double w1_cdf_vs_measure(const GridFunction1D& F, const EmpiricalMeasure& m)
{
  if (m.dim() != 1)
    throw DimensionError("w1_cdf_vs_measure needs a one-dimensional measure");
  if (F.size() < 2)
    throw DomainError("grid CDF needs at least two points");
  std::vector<std::pair<double, double>> atoms;
  for (std::size_t i = 0; i < m.size(); ++i)
    atoms.emplace_back(m.atoms.data[i], m.weights[i]);
  std::sort(atoms.begin(), atoms.end());

  const double x0 = F.origin, xN = F.x(F.size() - 1);
  // breakpoints: grid nodes and atoms
  std::vector<double> pts;
  pts.reserve(F.size() + atoms.size());
  for (std::size_t i = 0; i < F.size(); ++i)
    pts.push_back(F.x(i));
  for (const auto& a : atoms)
    pts.push_back(a.first);
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

  double total = 0.0;
  double G = 0.0;
  std::size_t ai = 0;
  // F is 0 left of the grid and 1 right of it
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    while (ai < atoms.size() && atoms[ai].first <= pts[k])
      G += atoms[ai++].second;
    const double a = pts[k], c = pts[k + 1];
    // F is linear on (a, c) inside the grid and constant outside it
    const double fa = (a < x0) ? 0.0 : (a >= xN ? 1.0 : F.at(a));
    const double fc = (c <= x0) ? 0.0 : (c > xN ? 1.0 : F.at(c));
    if (a < x0 || a >= xN) {
      total += std::abs(fa - G) * (c - a);
    } else {
      total += abs_linear_integral(fa - G, fc - G, c - a);
    }
  }
  return total;
}

double w1_risk(const DeconvEstimate& est, const GridFunction1D& truth_cdf)
{
  if (est.dimension != 1)
    throw DimensionError("grid-CDF risk is defined for d = 1");
  return w1_cdf(est.projected_cdf, truth_cdf);
}

double w1_risk(const DeconvEstimate& est, const EmpiricalMeasure& truth)
{
  if (truth.dim() != est.dimension)
    throw DimensionError("truth and estimate differ in dimension");
  if (est.dimension == 1)
    return w1_cdf_vs_measure(est.projected_cdf, truth);
  double best = 0.0;
  for (const auto& d : est.per_direction)
    best = std::max(best, w1_cdf_vs_measure(d.projected_cdf, project_measure(truth, d.direction)));
  return best;
}

double w1_risk(const DeconvEstimate& est,
               const std::function<GridFunction1D(const std::vector<double>&, const GridSpec&)>& sliced_truth)
{
  if (est.dimension == 1)
    return w1_cdf(est.projected_cdf, sliced_truth({ 1.0 }, est.projected_cdf.spec()));
  double best = 0.0;
  for (const auto& d : est.per_direction)
    best = std::max(best, w1_cdf(d.projected_cdf, sliced_truth(d.direction, d.projected_cdf.spec())));
  return best;
}

} // namespace wdeconv
