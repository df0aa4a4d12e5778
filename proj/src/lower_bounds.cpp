#include "wdeconv/lower_bounds.hpp"
#include "wdeconv/errors.hpp"
#include "wdeconv/fourier.hpp"

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <tuple>
#include <numbers>

namespace wdeconv {

namespace {

constexpr double pi = std::numbers::pi;

// Beyond this |x| the kernel H is below 1e-60 and is returned as zero.
constexpr double fan_cutoff = 5000.0;

double f0r_constant(double r)
{
  return std::exp(std::lgamma(r) - std::lgamma(r - 0.5)) / std::sqrt(pi);
}

// (1/pi) int_1^2 g(t) H^(t) dt with composite Gauss-Legendre panels fine
// enough to resolve the oscillation of g.
template <class G>
double fan_integral(double x, G&& g)
{
  const auto panels = static_cast<int>(std::max(8.0, std::ceil(std::abs(x) / 3.0)));
  const double w = 1.0 / panels;
  double s = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double a = 1.0 + p * w;
    s += boost::math::quadrature::gauss<double, 20>::integrate(
      [&](double t) { return g(t) * fan_kernel_spectrum(t); }, a, a + w);
  }
  return s / pi;
}

struct EnvelopeTable
{
  std::vector<double> x, f0, abs_sum;
};

// sum_s |H(b (x - x_s))| next to f0r(x) on a grid aligned with the shifts.
EnvelopeTable envelope_table(double r, int b)
{
  constexpr int q = 16; // grid points per unit in the scaled variable
  const GridSpec ygrid = GridSpec::centered(1024.0, 1u << 15);
  const GridFunction1D H = grid_ifft(
    tabulate_spectrum(ygrid, [](double t) { return cplx(fan_kernel_spectrum(t)); }),
    ygrid.origin);
  const auto H_at = [&](long k) -> double {
    // k indexes y = k / q
    const long idx = k + static_cast<long>(ygrid.length / 2);
    if (idx < 0 || idx >= static_cast<long>(ygrid.length))
      return 0.0;
    return H.values[static_cast<std::size_t>(idx)];
  };
  const double xlo = -40.0, xhi = 41.0;
  const long kmin = static_cast<long>(std::floor(xlo * q * b));
  const long kmax = static_cast<long>(std::ceil(xhi * q * b));
  EnvelopeTable t;
  for (long k = kmin; k <= kmax; ++k) {
    const double x = static_cast<double>(k) / (q * b);
    double s = 0.0;
    for (int j = 0; j < b; ++j)
      s += std::abs(H_at(k - static_cast<long>(j) * q));
    t.x.push_back(x);
    t.f0.push_back(base_density_f0r(r, x));
    t.abs_sum.push_back(s);
  }
  return t;
}

} // namespace

double PerturbedFamilySpec::amplitude() const
{
  return C > 0.0 ? C : default_amplitude(r, alpha, b);
}

void validate(const PerturbedFamilySpec& spec)
{
  if (!(spec.r > 1.0 && spec.r < 1.5))
    throw DomainError("r must lie in (1, 3/2)");
  if (!(spec.alpha >= 0.0))
    throw DomainError("alpha must be nonnegative");
  if (spec.b < 1)
    throw DomainError("b must be a positive integer");
  if (spec.C < 0.0)
    throw DomainError("amplitude must be positive (0 selects the default)");
  if (!spec.theta.empty()) {
    if (spec.theta.size() != static_cast<std::size_t>(spec.b))
      throw DomainError("theta must have b entries");
    for (int v : spec.theta)
      if (v != 0 && v != 1)
        throw DomainError("theta entries must be 0 or 1");
  }
}

double base_density_f0r(double r, double x)
{
  return f0r_constant(r) * std::pow(1.0 + x * x, -r);
}

double base_cdf_f0r(double r, double x)
{
  const double nu = 2.0 * r - 1.0;
  boost::math::students_t_distribution<double> t(nu);
  return boost::math::cdf(t, std::sqrt(nu) * x);
}

double base_cf_f0r(double r, double t)
{
  const double a = std::abs(t);
  if (a == 0.0)
    return 1.0;
  if (a > 700.0)
    return 0.0;
  const double nu = r - 0.5;
  return std::pow(2.0, 1.5 - r) / std::tgamma(nu) * std::pow(a, nu) *
         boost::math::cyl_bessel_k(nu, a);
}

double base_cf_f0r_small_t(double r, double t)
{
  return std::exp(-std::pow(std::abs(t), 2.0 * r - 1.0));
}

double base_first_moment_f0r(double r)
{
  return f0r_constant(r) / (r - 1.0);
}

double sample_f0r(double r, Rng& rng)
{
  // f0r is the law of T / sqrt(nu) with T Student-t on nu = 2r - 1 degrees
  const double nu = 2.0 * r - 1.0;
  const double g = sample_gamma(0.5 * nu, rng);
  return standard_normal(rng) / std::sqrt(2.0 * g);
}

double fan_kernel_spectrum(double t)
{
  const double u = 2.0 * std::abs(t) - 3.0;
  if (std::abs(u) >= 1.0)
    return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - u * u));
}

double fan_kernel_H(double x)
{
  if (std::abs(x) > fan_cutoff)
    return 0.0;
  return fan_integral(x, [x](double t) { return std::cos(t * x); });
}

double fan_kernel_primitive(double x)
{
  if (std::abs(x) > fan_cutoff)
    return 0.0;
  return fan_integral(x, [x](double t) { return std::sin(t * x) / t; });
}

double perturbed_density(const PerturbedFamilySpec& spec, double x)
{
  double f = base_density_f0r(spec.r, x);
  if (spec.theta.empty())
    return f;
  const double amp = spec.amplitude() * std::pow(spec.b, -spec.alpha);
  for (int s = 1; s <= spec.b; ++s)
    if (spec.theta[s - 1])
      f += amp * fan_kernel_H(spec.b * (x - (s - 1.0) / spec.b));
  return f;
}

double perturbed_cdf(const PerturbedFamilySpec& spec, double x)
{
  double F = base_cdf_f0r(spec.r, x);
  if (spec.theta.empty())
    return F;
  const double amp = spec.amplitude() * std::pow(spec.b, -(spec.alpha + 1.0));
  for (int s = 1; s <= spec.b; ++s)
    if (spec.theta[s - 1])
      F += amp * fan_kernel_primitive(spec.b * (x - (s - 1.0) / spec.b));
  return F;
}

namespace {

cplx perturbation_cf(const PerturbedFamilySpec& spec, double amp, double t)
{
  const double hs = fan_kernel_spectrum(t / spec.b);
  if (hs == 0.0 || spec.theta.empty())
    return 0.0;
  cplx s = 0.0;
  for (int k = 1; k <= spec.b; ++k)
    if (spec.theta[k - 1]) {
      const double xs = (k - 1.0) / spec.b;
      s += cplx(std::cos(t * xs), std::sin(t * xs));
    }
  return amp * s * hs / static_cast<double>(spec.b);
}

} // namespace

cplx perturbed_cf(const PerturbedFamilySpec& spec, double t)
{
  const double amp = spec.amplitude() * std::pow(spec.b, -spec.alpha);
  return base_cf_f0r(spec.r, t) + perturbation_cf(spec, amp, t);
}

GridFunction1D perturbed_density_on(const PerturbedFamilySpec& spec, const GridSpec& grid)
{
  if (2.0 * spec.b >= nyquist(grid))
    throw BandTooWide("grid does not resolve the perturbation band");
  const double amp = spec.amplitude() * std::pow(spec.b, -spec.alpha);
  GridFunction1D f = grid_ifft(
    tabulate_spectrum(grid, [&](double t) { return perturbation_cf(spec, amp, t); }),
    grid.origin);
  for (std::size_t i = 0; i < f.size(); ++i)
    f.values[i] += base_density_f0r(spec.r, f.x(i));
  f.kind = GridKind::density;
  return f;
}

GridFunction1D convolved_density_on(const PerturbedFamilySpec& spec,
                                    const NoiseModel& noise,
                                    const GridSpec& grid)
{
  if (2.0 * spec.b >= nyquist(grid))
    throw BandTooWide("grid does not resolve the perturbation band");
  PerturbedFamilySpec resolved = spec;
  resolved.C = spec.amplitude();
  GridFunction1D f = grid_ifft(
    tabulate_spectrum(grid, [&](double t) { return perturbed_cf(resolved, t) * cf(noise, t); }),
    grid.origin);
  f.kind = GridKind::density;
  return f;
}

double rejection_envelope(const PerturbedFamilySpec& spec)
{
  if (spec.theta.empty())
    return 1.0;
  const EnvelopeTable t = envelope_table(spec.r, spec.b);
  const double amp = spec.amplitude() * std::pow(spec.b, -spec.alpha);
  double m = 0.0;
  for (std::size_t i = 0; i < t.x.size(); ++i)
    m = std::max(m, t.abs_sum[i] / t.f0[i]);
  return 1.01 * (1.0 + amp * m);
}

double sample_perturbed(const PerturbedFamilySpec& spec, double envelope, Rng& rng)
{
  if (spec.theta.empty())
    return sample_f0r(spec.r, rng);
  for (;;) {
    const double x = sample_f0r(spec.r, rng);
    const double u = uniform01(rng);
    if (u * envelope * base_density_f0r(spec.r, x) <= perturbed_density(spec, x))
      return x;
  }
}

double default_amplitude(double r, double alpha, int b)
{
  if (b < 1)
    throw DomainError("b must be a positive integer");
  // the table costs an FFT, and C = 0 resolves here on every density call
  static std::mutex mutex;
  static std::map<std::tuple<double, double, int>, double> cache;
  const auto key = std::make_tuple(r, alpha, b);
  {
    std::lock_guard lock(mutex);
    if (const auto it = cache.find(key); it != cache.end())
      return it->second;
  }
  const EnvelopeTable t = envelope_table(r, b);
  double cmax = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < t.x.size(); ++i)
    if (t.abs_sum[i] > 0.0)
      cmax = std::min(cmax, t.f0[i] / t.abs_sum[i]);
  const double c = 0.9 * cmax * std::pow(b, alpha);
  std::lock_guard lock(mutex);
  cache.emplace(key, c);
  return c;
}

double chi2_divergence(const GridFunction1D& h0, const GridFunction1D& h1)
{
  if (!same_grid(h0.spec(), h1.spec()))
    throw GridMismatch("chi-square needs densities on the same grid");
  GridFunction1D g(h0.spec(), GridKind::signed_fn);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double a = h0.values[i], c = h1.values[i];
    if (a <= 0.0) {
      if (c > 0.0)
        throw SupportMismatch("h1 has mass where h0 vanishes");
      continue;
    }
    g.values[i] = (a - c) * (a - c) / a;
  }
  return trapezoid(g);
}

FamilyReport verify_family(const PerturbedFamilySpec& spec)
{
  validate(spec);
  FamilyReport rep;
  const double L = 64.0;
  const GridSpec grid = GridSpec::centered(L, 1u << 16);
  PerturbedFamilySpec resolved = spec;
  resolved.C = spec.amplitude();
  const GridFunction1D f = perturbed_density_on(resolved, grid);

  const double tails = 2.0 * (1.0 - base_cdf_f0r(spec.r, L));
  rep.integral = trapezoid(f) + tails;
  rep.min_value = *std::min_element(f.values.begin(), f.values.end());
  rep.is_density = std::abs(rep.integral - 1.0) <= 1e-6 && rep.min_value >= 0.0;

  GridFunction1D moment(grid, GridKind::signed_fn);
  for (std::size_t i = 0; i < f.size(); ++i)
    moment.values[i] = std::abs(f.x(i)) * std::abs(f.values[i] - base_density_f0r(spec.r, f.x(i)));
  rep.m1_bound = base_first_moment_f0r(spec.r) + trapezoid(moment);

  const double tmax = std::max(60.0, 2.0 * spec.b + 1.0);
  const double dt = 0.005;
  const auto steps = static_cast<std::size_t>(std::ceil(tmax / dt));
  double sob = 0.0;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = k * dt;
    const double w = (k == 0 || k == steps) ? 0.5 : 1.0;
    sob += w * std::pow(1.0 + t * t, resolved.alpha) * std::norm(perturbed_cf(resolved, t));
  }
  rep.sobolev_norm = 2.0 * sob * dt;
  rep.pass = rep.is_density && std::isfinite(rep.m1_bound) && std::isfinite(rep.sobolev_norm);
  return rep;
}

double single_flip_chi2(const PerturbedFamilySpec& spec, const NoiseModel& noise, int s)
{
  validate(spec);
  if (s < 1 || s > spec.b)
    throw DomainError("flip index must lie in 1..b");
  PerturbedFamilySpec base = spec;
  base.C = spec.amplitude();
  if (base.theta.empty())
    base.theta.assign(spec.b, 0);
  const GridSpec grid = GridSpec::centered(256.0, 1u << 16);
  const GridFunction1D h0 = convolved_density_on(base, noise, grid);

  // the two members differ by one shifted copy of H; transform it directly
  const double amp = base.C * std::pow(spec.b, -spec.alpha);
  const double xs = (s - 1.0) / spec.b;
  const double sign = base.theta[s - 1] ? -1.0 : 1.0;
  const GridFunction1D diff = grid_ifft(
    tabulate_spectrum(grid,
                      [&](double t) {
                        return sign * amp * fan_kernel_spectrum(t / spec.b) / spec.b *
                               cplx(std::cos(t * xs), std::sin(t * xs)) * cf(noise, t);
                      }),
    grid.origin);
  GridFunction1D g(grid, GridKind::signed_fn);
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (h0.values[i] <= 0.0)
      continue;
    g.values[i] = diff.values[i] * diff.values[i] / h0.values[i];
  }
  return trapezoid(g);
}

} // namespace wdeconv
