#include "wdeconv/approx_theory.hpp"
#include "wdeconv/errors.hpp"
#include "wdeconv/fourier.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace wdeconv {

namespace {

using boost::math::quadrature::gauss;

constexpr double tau_hi = 17.0 / 15.0;

double tau(double u)
{
  return spectrum(KernelSpec::tau1715(), u);
}

double upper_tail(double z)
{
  return 0.5 * std::erfc(z / std::numbers::sqrt2);
}

cplx expm1c(cplx z)
{
  if (std::abs(z) > 0.5)
    return std::exp(z) - 1.0;
  cplx term = z, sum = z;
  for (int n = 2; n < 20; ++n) {
    term *= z / static_cast<double>(n);
    sum += term;
  }
  return sum;
}

double binomial(int n, int k)
{
  double r = 1.0;
  for (int i = 1; i <= k; ++i)
    r = r * (n - k + i) / i;
  return r;
}

double factorial(int k)
{
  double r = 1.0;
  for (int i = 2; i <= k; ++i)
    r *= i;
  return r;
}

double h_of_sigma(double sigma, const ApproxConstants& c)
{
  return c.c_h / std::sqrt(std::abs(std::log(sigma)));
}

void check_args(int m, double b, double sigma)
{
  if (m < 1)
    throw DomainError("m must be at least 1");
  if (std::abs(std::abs(b) - 0.5) > 1e-12)
    throw DomainError("b must be -1/2 or +1/2");
  if (!(sigma > 0.0 && sigma < 0.5))
    throw DomainError("sigma must lie in (0, 0.5)");
}

// sum_k (-sigma^2/2)^k / k! sum_j C(2k, j) (-b)^{2k-j} (-it)^j F{H}(delta t)
cplx t_multiplier(double t, int m, double b, double sigma, double delta, double h)
{
  const double fh = tau_phi(delta * t, h);
  if (fh == 0.0)
    return 0.0;
  const cplx mit(0.0, -t);
  cplx total = 0.0;
  for (int k = 1; k < m; ++k) {
    cplx inner = 0.0;
    for (int j = 0; j <= 2 * k; ++j)
      inner += binomial(2 * k, j) * std::pow(-b, 2 * k - j) * std::pow(mit, j);
    total += std::pow(-0.5 * sigma * sigma, k) / factorial(k) * inner;
  }
  return total * fh;
}

void check_band(const GridSpec& g, double delta, double h)
{
  const double reach = (tau_hi + 12.0 * h) / delta;
  if (reach >= 0.95 * nyquist(g))
    throw BandTooWide("grid step too coarse for the smoothing kernel");
}

// e^{-b x} D^j H_delta on a centred copy of f's grid.
GridFunction1D weighted_derivative_kernel(const GridSpec& g, int j, double b, double delta, double h)
{
  const GridSpec centred{ -static_cast<double>(g.length / 2) * g.step, g.step, g.length };
  GridSpectrum s = frequency_grid(centred);
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double t = s.t(k);
    s.values[k] = std::pow(cplx(0.0, -t), j) * tau_phi(delta * t, h);
  }
  GridFunction1D out = grid_ifft(s, centred.origin);
  // beyond 9 delta / h the Gaussian factor of H is below e^{-40}; what the
  // transform leaves there is round-off that the exponential weight would blow up
  const double reach = 9.0 * delta / h;
  double total = 0.0, edge = 0.0;
  const std::size_t band = g.length / 8;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (std::abs(out.x(i)) > reach)
      out.values[i] = 0.0;
    out.values[i] *= std::exp(-b * out.x(i));
    const double a = std::abs(out.values[i]);
    total += a;
    if (i < band || i >= out.size() - band)
      edge += a;
  }
  if (edge > 1e-6 * total || reach > 0.75 * std::abs(centred.origin))
    throw GridTooNarrow("weighted kernel has mass near the grid ends");
  return out;
}

} // namespace

double tau_phi(double s, double h)
{
  if (!(h > 0.0))
    throw DomainError("h must be positive");
  s = std::abs(s);
  if (s > tau_hi + 40.0 * h)
    return 0.0;
  // flat part [-1, 1] in closed form
  double v = upper_tail((s - 1.0) / h) - upper_tail((s + 1.0) / h);
  const auto piece = [&](double u) {
    const double a = (s - u) / h, c = (s + u) / h;
    return tau(u) * (std::exp(-0.5 * a * a) + std::exp(-0.5 * c * c)) /
           (h * std::sqrt(2.0 * std::numbers::pi));
  };
  const int panels = 16;
  const double w = (tau_hi - 1.0) / panels;
  for (int p = 0; p < panels; ++p)
    v += gauss<double, 20>::integrate(piece, 1.0 + p * w, 1.0 + (p + 1) * w);
  return v;
}

double kernel_H(double x, double h)
{
  if (!(h > 0.0))
    throw DomainError("h must be positive");
  const double a = std::abs(x);
  double flat = a < 1e-8 ? 1.0 - a * a / 6.0 : std::sin(a) / a;
  const int panels = std::max(4, static_cast<int>(std::ceil(a * (tau_hi - 1.0) / 2.0)));
  const double w = (tau_hi - 1.0) / panels;
  double taper = 0.0;
  for (int p = 0; p < panels; ++p)
    taper += gauss<double, 20>::integrate([&](double u) { return std::cos(a * u) * tau(u); },
                                          1.0 + p * w,
                                          1.0 + (p + 1) * w);
  const double tau_hat = 2.0 * (flat + taper);
  return tau_hat / (2.0 * std::numbers::pi) * std::exp(-0.5 * (h * x) * (h * x));
}

double approx_gamma(double sigma)
{
  return std::expm1(-sigma * sigma / 8.0);
}

GridFunction1D operator_T(const GridFunction1D& f, int m, double b, double sigma, const ApproxConstants& c)
{
  check_args(m, b, sigma);
  GridFunction1D out(f.origin, f.step, f.values, GridKind::signed_fn);
  if (m == 1)
    return out;
  const double delta = c.c_delta * sigma;
  const double h = h_of_sigma(sigma, c);
  check_band(f.spec(), delta, h);
  std::vector<GridFunction1D> conv(2 * (m - 1) + 1);
  for (int j = 0; j <= 2 * (m - 1); ++j)
    conv[j] = convolve(f, weighted_derivative_kernel(f.spec(), j, b, delta, h));
  for (int k = 1; k < m; ++k) {
    const double ck = std::pow(-0.5 * sigma * sigma, k) / factorial(k);
    for (int j = 0; j <= 2 * k; ++j) {
      const double w = ck * binomial(2 * k, j) * std::pow(-b, 2 * k - j);
      for (std::size_t i = 0; i < out.size(); ++i)
        out.values[i] += w * conv[j].values[i];
    }
  }
  return out;
}

GridFunction1D tilted_density(const GridFunction1D& f0, double b, double* mass)
{
  GridFunction1D out(f0.origin, f0.step, f0.values, GridKind::density);
  for (std::size_t i = 0; i < out.size(); ++i)
    out.values[i] *= std::exp(b * out.x(i));
  const double m = trapezoid(out);
  if (!(m > 0.0) || !std::isfinite(m))
    throw PreconditionViolated("exponentially tilted density is not integrable on the grid");
  for (double& v : out.values)
    v /= m;
  if (mass)
    *mass = m;
  return out;
}

GridFunction1D h_m_b_sigma(const GridFunction1D& f0, int m, double b, double sigma, const ApproxConstants& c)
{
  check_args(m, b, sigma);
  const double delta = c.c_delta * sigma;
  const double h = h_of_sigma(sigma, c);
  check_band(f0.spec(), delta, h);
  const GridFunction1D hbar = tilted_density(f0, b);
  GridSpectrum s = grid_fft(hbar);
  const double inv_gamma = 1.0 / approx_gamma(sigma);
  for (std::size_t k = 0; k < s.size(); ++k)
    s.values[k] *= inv_gamma * t_multiplier(s.t(k), m, b, sigma, delta, h);
  return grid_ifft(s, f0.origin);
}

double identity_residual(const GridFunction1D& f0, int m, double b, double sigma, const ApproxConstants& c)
{
  double M = 0.0;
  const GridFunction1D hbar = tilted_density(f0, b, &M);
  const GridFunction1D T = operator_T(f0, m, b, sigma, c);
  const GridFunction1D hm = h_m_b_sigma(f0, m, b, sigma, c);
  const double gamma = approx_gamma(sigma);
  double worst = 0.0;
  for (std::size_t i = 0; i < T.size(); ++i) {
    const double lhs = std::exp(b * T.x(i)) * T.values[i] / M;
    worst = std::max(worst, std::abs(lhs - hbar.values[i] - gamma * hm.values[i]));
  }
  return worst;
}

namespace {

void check_exponential_tails(const GridFunction1D& f0)
{
  double peak = 0.0;
  for (double v : f0.values)
    peak = std::max(peak, std::abs(v));
  const auto weighted = [&](std::size_t i) { return std::exp(0.5 * std::abs(f0.x(i))) * std::abs(f0.values[i]); };
  if (weighted(0) > 1e-10 * peak || weighted(f0.size() - 1) > 1e-10 * peak)
    throw PreconditionViolated("e^{|x|/2} f0 has not decayed at the grid ends");
}

} // namespace

double approx_error_L2(const GridFunction1D& f0, int m, double sigma, const ApproxConstants& c)
{
  check_exponential_tails(f0);
  const double gamma = approx_gamma(sigma);
  double total = 0.0;
  for (const double b : { -0.5, 0.5 }) {
    double M = 0.0;
    const GridSpectrum hb = grid_fft(tilted_density(f0, b, &M));
    const GridSpectrum hh = grid_fft(h_m_b_sigma(f0, m, b, sigma, c));
    double acc = 0.0;
    for (std::size_t k = 0; k < hb.size(); ++k) {
      const cplx psi(-b, -hb.t(k));
      const cplx q = 0.5 * sigma * sigma * psi * psi;
      // e^q (1 - e^{-q}) = e^q - 1 keeps large |t| finite
      const cplx val = (expm1c(q) * hb.values[k] + std::exp(q) * gamma * hh.values[k]) / (1.0 - psi * psi);
      acc += std::norm(val);
    }
    total += M * M * acc * hb.step / (2.0 * std::numbers::pi);
  }
  return total;
}

double approx_error_L2_direct(const GridFunction1D& f0, int m, double sigma, const ApproxConstants& c)
{
  check_exponential_tails(f0);
  double total = 0.0;
  for (const double b : { -0.5, 0.5 }) {
    const GridFunction1D T = operator_T(f0, m, b, sigma, c);
    const GridFunction1D a =
      apply_multiplier(T, [&](double t) { return cplx(std::exp(-0.5 * sigma * sigma * t * t) / (1.0 + t * t)); });
    const GridFunction1D r = apply_multiplier(f0, [](double t) { return cplx(1.0 / (1.0 + t * t)); });
    GridFunction1D g(f0.origin, f0.step, std::vector<double>(f0.size()), GridKind::signed_fn);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double v = std::exp(b * g.x(i)) * (a.values[i] - r.values[i]);
      g.values[i] = v * v;
    }
    total += trapezoid(g);
  }
  return total;
}

double cdf_bias_norm(const std::function<cplx(double)>& cf, const KernelSpec& kernel, double h, const GridSpec& grid)
{
  if (!(h > 0.0 && h < 0.5))
    throw DomainError("h must lie in (0, 0.5)");
  if (kernel.support() / h >= 0.95 * nyquist(grid))
    throw BandTooWide("grid step too coarse for this bandwidth");
  GridSpectrum s = frequency_grid(grid);
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double t = s.t(k);
    const double damp = 1.0 - spectrum(kernel, h * t);
    s.values[k] = (t == 0.0 || damp == 0.0) ? cplx(0.0) : cf(t) * damp / cplx(0.0, -t);
  }
  return trapezoid_abs(grid_ifft(s, grid.origin));
}

BiasReport cdf_bias_norm(const Truth1D& mixture,
                         const KernelSpec& kernel,
                         double h,
                         double alpha,
                         const GridSpec& grid,
                         bool strict)
{
  if (mixture.sds().empty())
    throw DomainError("a Gaussian-mixture truth is required");
  BiasReport r;
  const double min_sd = *std::min_element(mixture.sds().begin(), mixture.sds().end());
  r.precondition_ok = min_sd >= h * std::sqrt((2.0 * alpha + 1.0) * std::abs(std::log(h)));
  if (!r.precondition_ok && strict)
    throw PreconditionViolated("mixture scale below h sqrt((2 alpha + 1) |log h|)");
  r.value = cdf_bias_norm([&](double t) { return mixture.cf(t); }, kernel, h, grid);
  return r;
}

double cdf_bias_norm(const GridFunction1D& cdf, const KernelSpec& kernel, double h)
{
  if (!(h > 0.0 && h < 0.5))
    throw DomainError("h must lie in (0, 0.5)");
  const GridSpec g = cdf.spec();
  // mean and sd of the tabulated law, for a Gaussian reference CDF
  GridFunction1D xf = cdf;
  for (std::size_t i = 0; i < xf.size(); ++i)
    xf.values[i] = 2.0 * xf.x(i) * cdf.values[i];
  const double b = g.back();
  const double mean = b - trapezoid(cdf);
  const double second = b * b - trapezoid(xf);
  const double sd = std::max(std::sqrt(std::max(second - mean * mean, 0.0)), 8.0 * g.step);

  GridFunction1D diff = cdf;
  diff.kind = GridKind::signed_fn;
  for (std::size_t i = 0; i < diff.size(); ++i)
    diff.values[i] -= normal_cdf((diff.x(i) - mean) / sd);
  GridSpectrum s = grid_fft(diff);
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double t = s.t(k);
    const double damp = 1.0 - spectrum(kernel, h * t);
    cplx ref = 0.0;
    if (t != 0.0 && damp != 0.0)
      ref = std::exp(cplx(-0.5 * sd * sd * t * t, t * mean)) / cplx(0.0, -t);
    s.values[k] = damp * (s.values[k] + ref);
  }
  return trapezoid_abs(grid_ifft(s, g.origin));
}

double t_term_multiplier(const std::vector<double>& v, double h, double beta)
{
  if (!(h > 0.0 && h < 1.0))
    throw DomainError("h must lie in (0, 1)");
  const double lh = std::abs(std::log(h));
  int active = 0;
  double prod = 1.0;
  for (double vj : v)
    if (std::abs(vj) > h) {
      ++active;
      prod *= std::pow(std::abs(vj), beta);
    }
  if (beta * active <= 1.0)
    return lh * lh;
  return lh * std::pow(h, 1.0 - beta * active) * prod;
}

InversionReport inversion_rhs(const GridFunction1D& fX,
                              const GridFunction1D& f0X,
                              const NoiseModel& noise,
                              const std::vector<double>& h_values,
                              double smooth_alpha)
{
  if (!same_grid(fX.spec(), f0X.spec()))
    throw GridMismatch("densities must share a grid");
  const auto noise_cf = [&](double t) { return cf(noise, t); };
  const GridFunction1D fY = apply_multiplier(fX, noise_cf);
  const GridFunction1D f0Y = apply_multiplier(f0X, noise_cf);

  const auto l1_cdf = [](const GridFunction1D& a, const GridFunction1D& b) {
    GridFunction1D Fa = cumulative_trapezoid(a), Fb = cumulative_trapezoid(b);
    for (std::size_t i = 0; i < Fa.size(); ++i)
      Fa.values[i] -= Fb.values[i];
    Fa.kind = GridKind::signed_fn;
    return trapezoid_abs(Fa);
  };
  const double lhs = l1_cdf(fX, f0X);
  const double w1y = l1_cdf(fY, f0Y);
  GridFunction1D dY = fY;
  for (std::size_t i = 0; i < dY.size(); ++i)
    dY.values[i] -= f0Y.values[i];
  const double l1y = trapezoid_abs(dY);

  InversionReport rep;
  rep.h_values = h_values;
  for (double h : h_values) {
    if (!(h > 0.0 && h < 0.5))
      throw DomainError("h must lie in (0, 0.5)");
    InversionRow row;
    row.h = h;
    row.lhs = lhs;
    row.bias_term = smooth_alpha > 0.0 ? std::pow(h, smooth_alpha + 1.0) : h;
    row.w1_y_term = w1y;
    row.T_term = t_term_multiplier({ 1.0 }, h, noise.beta()) * l1y;
    row.rhs = row.bias_term + row.w1_y_term + row.T_term;
    row.ratio = row.rhs > 0.0 ? row.lhs / row.rhs : 0.0;
    rep.rows.push_back(row);
  }
  return rep;
}

} // namespace wdeconv
