#include "wdeconv/fourier.hpp"
#include "wdeconv/errors.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

namespace wdeconv {

namespace {

std::mutex& planner_mutex()
{
  static std::mutex m;
  return m;
}

// In-place transform; sign is FFTW_FORWARD (e^{-i}) or FFTW_BACKWARD (e^{+i}).
void dft_inplace(std::vector<cplx>& data, int sign)
{
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_1d(static_cast<int>(data.size()), buf, buf, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(plan);
}

void dft2_inplace(std::vector<cplx>& data, int n, int sign)
{
  auto* buf = reinterpret_cast<fftw_complex*>(data.data());
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan = fftw_plan_dft_2d(n, n, buf, buf, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(plan);
}

double normal_cdf(double z)
{
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

} // namespace

GridSpectrum frequency_grid(const GridSpec& space)
{
  if (space.length < 2)
    throw DomainError("frequency grid needs at least two points");
  GridSpectrum s;
  const auto n = static_cast<double>(space.length);
  s.step = 2.0 * std::numbers::pi / (n * space.step);
  s.origin = -static_cast<double>(space.length / 2) * s.step;
  s.values.assign(space.length, cplx(0.0, 0.0));
  return s;
}

double nyquist(const GridSpec& space)
{
  return std::numbers::pi / space.step;
}

GridSpectrum grid_fft(const GridSpec& space, const std::vector<cplx>& values)
{
  if (values.size() != space.length)
    throw GridMismatch("values do not match grid length");
  GridSpectrum s = frequency_grid(space);
  std::vector<cplx> buf(values);
  for (std::size_t j = 1; j < buf.size(); j += 2)
    buf[j] = -buf[j];
  dft_inplace(buf, FFTW_BACKWARD);
  for (std::size_t k = 0; k < buf.size(); ++k) {
    const double phase = s.t(k) * space.origin;
    s.values[k] = space.step * buf[k] * cplx(std::cos(phase), std::sin(phase));
  }
  return s;
}

GridSpectrum grid_fft(const GridFunction1D& f)
{
  std::vector<cplx> v(f.values.begin(), f.values.end());
  return grid_fft(f.spec(), v);
}

std::vector<cplx> grid_ifft_complex(const GridSpectrum& s, double x_origin)
{
  const std::size_t n = s.size();
  if (n < 2)
    throw DomainError("spectrum needs at least two points");
  const double dx = 2.0 * std::numbers::pi / (static_cast<double>(n) * s.step);
  std::vector<cplx> buf(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double phase = -s.t(k) * x_origin;
    buf[k] = s.values[k] * cplx(std::cos(phase), std::sin(phase));
  }
  dft_inplace(buf, FFTW_FORWARD);
  const double scale = 1.0 / (static_cast<double>(n) * dx);
  for (std::size_t j = 0; j < n; ++j)
    buf[j] *= (j % 2 ? -scale : scale);
  return buf;
}

GridFunction1D grid_ifft(const GridSpectrum& s,
                         double x_origin,
                         GridKind kind,
                         double imag_tol)
{
  const auto c = grid_ifft_complex(s, x_origin);
  const double dx = 2.0 * std::numbers::pi / (static_cast<double>(s.size()) * s.step);
  GridFunction1D f(x_origin, dx, std::vector<double>(c.size()), kind);
  double max_imag = 0.0;
  for (std::size_t j = 0; j < c.size(); ++j) {
    f.values[j] = c[j].real();
    max_imag = std::max(max_imag, std::abs(c[j].imag()));
  }
  if (imag_tol >= 0.0 && max_imag > imag_tol)
    throw ImagTooLarge("inverse transform has imaginary part " + std::to_string(max_imag));
  return f;
}

GridSpectrum tabulate_spectrum(const GridSpec& space,
                               const std::function<cplx(double)>& fn)
{
  GridSpectrum s = frequency_grid(space);
  for (std::size_t k = 0; k < s.size(); ++k)
    s.values[k] = fn(s.t(k));
  return s;
}

GridFunction1D convolve(const GridFunction1D& f, const GridFunction1D& g)
{
  if (f.size() != g.size() || std::abs(f.step - g.step) > 1e-12 * f.step)
    throw GridMismatch("convolution operands need the same step and length");
  GridSpectrum a = grid_fft(f);
  const GridSpectrum b = grid_fft(g);
  for (std::size_t k = 0; k < a.size(); ++k)
    a.values[k] *= b.values[k];
  // both spectra are continuous transforms, so the product inverts directly
  GridFunction1D out = grid_ifft(a, f.origin, f.kind);
  return out;
}

GridFunction1D apply_multiplier(const GridFunction1D& f,
                                const std::function<cplx(double)>& multiplier)
{
  GridSpectrum s = grid_fft(f);
  for (std::size_t k = 0; k < s.size(); ++k)
    s.values[k] *= multiplier(s.t(k));
  return grid_ifft(s, f.origin, GridKind::signed_fn);
}

GridFunction1D cdf_from_spectrum(const GridSpec& space,
                                 const GridSpectrum& spectrum,
                                 double mean,
                                 double reference_sd)
{
  if (spectrum.size() != space.length)
    throw GridMismatch("spectrum does not match grid length");
  GridSpectrum diff = spectrum;
  for (std::size_t k = 0; k < diff.size(); ++k) {
    const double t = diff.t(k);
    if (t == 0.0) {
      diff.values[k] = 0.0;
      continue;
    }
    const double sd_t = reference_sd * t;
    const cplx ref = std::exp(cplx(-0.5 * sd_t * sd_t, t * mean));
    diff.values[k] = (diff.values[k] - ref) / cplx(0.0, -t);
  }
  GridFunction1D f = grid_ifft(diff, space.origin, GridKind::signed_fn);
  for (std::size_t j = 0; j < f.size(); ++j)
    f.values[j] += normal_cdf((f.x(j) - mean) / reference_sd);
  return f;
}

GridFunction1D cdf_from_cf(const GridSpec& space,
                           const std::function<cplx(double)>& cf,
                           double mean,
                           double reference_sd)
{
  return cdf_from_spectrum(space, tabulate_spectrum(space, cf), mean, reference_sd);
}

std::vector<double> grid_ifft_2d(const GridSpec& space,
                                 const std::vector<cplx>& spectrum,
                                 double* max_imag)
{
  const std::size_t n = space.length;
  if (spectrum.size() != n * n)
    throw GridMismatch("2-D spectrum must be length^2");
  const GridSpectrum axis = frequency_grid(space);
  std::vector<cplx> buf(spectrum);
  std::vector<cplx> phase(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double p = -axis.t(k) * space.origin;
    phase[k] = cplx(std::cos(p), std::sin(p));
  }
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      buf[a * n + b] *= phase[a] * phase[b];
  dft2_inplace(buf, static_cast<int>(n), FFTW_FORWARD);
  const double scale = 1.0 / std::pow(static_cast<double>(n) * space.step, 2);
  std::vector<double> out(n * n);
  double mi = 0.0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      const cplx v = buf[a * n + b] * ((a + b) % 2 ? -scale : scale);
      out[a * n + b] = v.real();
      mi = std::max(mi, std::abs(v.imag()));
    }
  if (max_imag)
    *max_imag = mi;
  return out;
}

} // namespace wdeconv
