#include "wdeconv/errors.hpp"
#include "wdeconv/fourier.hpp"
#include "wdeconv/grid.hpp"
#include "wdeconv/truth.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace wdeconv;

namespace {

GridFunction1D gaussian_on(const GridSpec& g, double mean, double sd)
{
  GridFunction1D f(g, GridKind::density);
  for (std::size_t i = 0; i < f.size(); ++i)
    f.values[i] = normal_pdf((f.x(i) - mean) / sd) / sd;
  return f;
}

} // namespace

TEST_CASE("centered grids are symmetric powers of two")
{
  const GridSpec g = GridSpec::centered(20.0, 2048);
  CHECK(g.length == 2048);
  CHECK(g.x(1024) == doctest::Approx(0.0));
  CHECK(g.origin == doctest::Approx(-20.0));
  CHECK(is_power_of_two(g.length));
  CHECK_FALSE(is_power_of_two(1000));
}

TEST_CASE("fft round trip is the identity")
{
  const GridSpec g = GridSpec::centered(10.0, 512);
  GridFunction1D f = gaussian_on(g, 0.7, 0.9);
  for (std::size_t i = 0; i < f.size(); ++i)
    f.values[i] += 0.1 * std::sin(f.x(i));
  const GridFunction1D back = grid_ifft(grid_fft(f), f.origin);
  double err = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i)
    err = std::max(err, std::abs(back.values[i] - f.values[i]));
  CHECK(err < 1e-10);
}

TEST_CASE("gaussian spectrum matches its characteristic function")
{
  const double sd = 0.8;
  const GridSpectrum s = grid_fft(gaussian_on(GridSpec::centered(20.0, 1024), 0.0, sd));
  double err = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k) {
    const double t = s.t(k);
    err = std::max(err, std::abs(s.values[k] - std::exp(-0.5 * sd * sd * t * t)));
  }
  CHECK(err < 1e-8);
}

TEST_CASE("laplace density spectrum is 1 / (1 + t^2)")
{
  const GridSpec g = GridSpec::centered(40.0, 1 << 16);
  GridFunction1D f(g, GridKind::density);
  for (std::size_t i = 0; i < f.size(); ++i)
    f.values[i] = 0.5 * std::exp(-std::abs(f.x(i)));
  const GridSpectrum s = grid_fft(f);
  double err = 0.0;
  for (std::size_t k = 0; k < s.size(); ++k)
    if (std::abs(s.t(k)) <= 20.0)
      err = std::max(err, std::abs(s.values[k] - 1.0 / (1.0 + s.t(k) * s.t(k))));
  CHECK(err < 1e-6);
}

TEST_CASE("convolving gaussians adds variances")
{
  const GridSpec g = GridSpec::centered(20.0, 2048);
  const GridFunction1D c = convolve(gaussian_on(g, 1.0, 0.6), gaussian_on(g, -0.5, 0.8));
  const GridFunction1D want = gaussian_on(g, 0.5, 1.0);
  double err = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i)
    err = std::max(err, std::abs(c.values[i] - want.values[i]));
  CHECK(err < 1e-10);
}

TEST_CASE("cdf from characteristic function")
{
  const GridSpec g = GridSpec::centered(20.0, 2048);
  const GridFunction1D F = cdf_from_cf(
    g, [](double t) { return std::exp(cplx(-0.5 * t * t, 0.3 * t)); }, 0.3, 1.0);
  double err = 0.0;
  for (std::size_t i = 0; i < F.size(); ++i)
    err = std::max(err, std::abs(F.values[i] - normal_cdf(F.x(i) - 0.3)));
  CHECK(err < 1e-9);
}

TEST_CASE("trapezoid rules and invariants")
{
  const GridSpec g = GridSpec::centered(15.0, 1024);
  const GridFunction1D f = gaussian_on(g, 0.0, 1.0);
  CHECK(trapezoid(f) == doctest::Approx(1.0).epsilon(1e-10));
  const GridFunction1D F = cumulative_trapezoid(f);
  CHECK(F.values.back() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK_NOTHROW(check_invariants(f));
  GridFunction1D bad = f;
  bad.values[10] = -0.5;
  CHECK_THROWS_AS(check_invariants(bad), DomainError);
  GridFunction1D s(g, GridKind::signed_fn);
  s.values[100] = -1.0;
  CHECK(negative_mass(s) == doctest::Approx(g.step));
}

TEST_CASE("grid csv round trip")
{
  const auto path = std::filesystem::temp_directory_path() / "wdeconv_grid_roundtrip.csv";
  const GridFunction1D f = gaussian_on(GridSpec::centered(5.0, 64), 0.1, 0.7);
  write_grid_csv(path.string(), f);
  const GridFunction1D g = read_grid_csv(path.string(), GridKind::density);
  REQUIRE(g.size() == f.size());
  CHECK(g.origin == f.origin);
  CHECK(g.step == doctest::Approx(f.step).epsilon(1e-15));
  for (std::size_t i = 0; i < f.size(); ++i)
    CHECK(g.values[i] == f.values[i]);
  std::filesystem::remove(path);
}
