#include "wdeconv/kernels.hpp"
#include "wdeconv/errors.hpp"
#include "wdeconv/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace wdeconv {

double KernelSpec::support() const
{
  switch (kind) {
    case KernelKind::FlatTop: return 2.0;
    case KernelKind::HigherOrder: return 1.0;
    case KernelKind::Tau1715: return 17.0 / 15.0;
  }
  return 2.0;
}

std::string to_string(KernelKind kind)
{
  switch (kind) {
    case KernelKind::FlatTop: return "flat-top";
    case KernelKind::HigherOrder: return "higher-order";
    case KernelKind::Tau1715: return "tau1715";
  }
  return "unknown";
}

KernelKind kernel_kind_from_string(const std::string& s)
{
  if (s == "flat-top") return KernelKind::FlatTop;
  if (s == "higher-order") return KernelKind::HigherOrder;
  if (s == "tau1715") return KernelKind::Tau1715;
  throw ConfigError("unknown kernel '" + s + "'");
}

double smoothstep(double u)
{
  if (u <= 0.0)
    return 0.0;
  if (u >= 1.0)
    return 1.0;
  const double a = std::exp(-1.0 / u);
  const double b = std::exp(-1.0 / (1.0 - u));
  return a / (a + b);
}

std::vector<double> higher_order_coefficients(int order)
{
  if (order < 0)
    throw DomainError("kernel order must be nonnegative");
  // Taylor coefficients of exp(u / (1 - u)) = exp(sum_{k>=1} u^k)
  const int deg = order / 2;
  std::vector<double> e(deg + 1, 0.0);
  e[0] = 1.0;
  for (int n = 1; n <= deg; ++n) {
    double s = 0.0;
    for (int k = 1; k <= n; ++k)
      s += k * e[n - k];
    e[n] = s / n;
  }
  return e;
}

double spectrum(const KernelSpec& spec, double t)
{
  const double a = std::abs(t);
  switch (spec.kind) {
    case KernelKind::FlatTop:
      if (a <= 1.0)
        return 1.0;
      return smoothstep(2.0 - a);
    case KernelKind::Tau1715: {
      if (a < 1.0)
        return 1.0;
      constexpr double hi = 17.0 / 15.0;
      return smoothstep((hi - a) / (hi - 1.0));
    }
    case KernelKind::HigherOrder: {
      if (a >= 1.0)
        return 0.0;
      const double u = a * a;
      const auto c = higher_order_coefficients(spec.order);
      double p = 0.0;
      for (auto it = c.rbegin(); it != c.rend(); ++it)
        p = p * u + *it;
      return p * std::exp(-u / (1.0 - u));
    }
  }
  return 0.0;
}

GridFunction1D spatial_kernel(const KernelSpec& spec,
                              const GridSpec& grid,
                              double h,
                              double edge_tol)
{
  if (!(h > 0.0))
    throw DomainError("bandwidth must be positive");
  if (spec.support() / h > nyquist(grid))
    throw BandTooWide("kernel spectrum exceeds the grid Nyquist frequency");
  const GridSpectrum s = tabulate_spectrum(grid, [&](double t) { return cplx(spectrum(spec, h * t)); });
  GridFunction1D k = grid_ifft(s, grid.origin, GridKind::signed_fn);
  const double edge = std::max(std::abs(k.values.front()), std::abs(k.values.back()));
  if (edge > edge_tol)
    throw GridTooNarrow("kernel is " + std::to_string(edge) + " at the grid edge");
  return k;
}

double bump_chi(double t)
{
  const double a = std::abs(t);
  if (a <= 1.0)
    return 1.0;
  if (a >= 2.0)
    return 0.0;
  const double u = a - 1.0;
  return std::numbers::e * std::exp(-1.0 / (1.0 - u * u));
}

GridFunction1D fractional_derivative(const GridFunction1D& f, double alpha, double tail_tol)
{
  if (!(alpha >= 0.0))
    throw DomainError("derivative order must be nonnegative");
  if (alpha == 0.0)
    return f;
  GridSpectrum s = grid_fft(f);
  const double ny = nyquist(f.spec());
  double total = 0.0, tail = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double t = s.t(k);
    const double a = std::abs(t);
    const double w = std::pow(a, alpha) * std::abs(s.values[k]);
    if (!std::isfinite(w))
      throw SpectralDivergence("weighted spectrum is not finite");
    total += w;
    if (a > 0.9 * ny)
      tail += w;
    const double phase = -0.5 * std::numbers::pi * alpha * (t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0));
    s.values[k] *= std::pow(a, alpha) * cplx(std::cos(phase), std::sin(phase));
  }
  if (total > 0.0 && tail > tail_tol * total)
    throw SpectralDivergence("weighted spectrum has not decayed at the Nyquist frequency");
  // the most negative frequency has no symmetric partner on the grid
  s.values[0] = 0.0;
  return grid_ifft(s, f.origin, GridKind::signed_fn);
}

} // namespace wdeconv
