#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <vector>

namespace wdeconv {

//! What a tabulated function represents; drives the invariant checks.
enum class GridKind
{
  density,
  cdf,
  signed_fn
};

//! Uniform grid template: `length` points starting at `origin`.
struct GridSpec
{
  double origin = 0.0;
  double step = 1.0;
  std::size_t length = 0;

  double x(std::size_t i) const { return origin + step * static_cast<double>(i); }
  double back() const { return x(length - 1); }

  //! Grid with `length` points centred on zero: origin = -(length/2) * step.
  static GridSpec centered(double half_width, std::size_t length);
  //! Power-of-two grid covering [lo, hi].
  static GridSpec covering(double lo, double hi, std::size_t length);
};

bool is_power_of_two(std::size_t n);

//! Real function tabulated on a uniform grid.
struct GridFunction1D
{
  double origin = 0.0;
  double step = 1.0;
  std::vector<double> values;
  GridKind kind = GridKind::signed_fn;

  GridFunction1D() = default;
  GridFunction1D(const GridSpec& spec, GridKind k);
  GridFunction1D(double origin_, double step_, std::vector<double> v, GridKind k);

  std::size_t size() const { return values.size(); }
  double x(std::size_t i) const { return origin + step * static_cast<double>(i); }
  GridSpec spec() const { return { origin, step, values.size() }; }

  //! Linear interpolation; constant extrapolation beyond the ends.
  double at(double x) const;
};

//! Complex spectrum tabulated on a uniform frequency grid.
struct GridSpectrum
{
  double origin = 0.0;
  double step = 1.0;
  std::vector<std::complex<double>> values;

  std::size_t size() const { return values.size(); }
  double t(std::size_t k) const { return origin + step * static_cast<double>(k); }
};

bool same_grid(const GridSpec& a, const GridSpec& b, double rel_tol = 1e-12);

double trapezoid(const GridFunction1D& f);
double trapezoid_abs(const GridFunction1D& f);
//! Running trapezoid integral starting at zero on the left end.
GridFunction1D cumulative_trapezoid(const GridFunction1D& f);
//! Integral of the negative part.
double negative_mass(const GridFunction1D& f);

//! Throws DomainError when the invariants attached to `f.kind` fail.
void check_invariants(const GridFunction1D& f, double density_mass_tol = 1e-3);

void write_grid_csv(const std::string& path, const GridFunction1D& f);
GridFunction1D read_grid_csv(const std::string& path, GridKind kind);
void write_spectrum_csv(const std::string& path, const GridSpectrum& s);
GridSpectrum read_spectrum_csv(const std::string& path);

} // namespace wdeconv
