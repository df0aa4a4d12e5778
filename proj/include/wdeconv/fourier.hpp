#pragma once

#include "wdeconv/grid.hpp"

#include <complex>
#include <functional>
#include <vector>

namespace wdeconv {

using cplx = std::complex<double>;

// Transform convention used everywhere in the library:
//   f^(t) = \int e^{+itx} f(x) dx,   f(x) = (2 pi)^{-1} \int e^{-itx} f^(t) dt.
// Grid transforms approximate the integrals with the step multiplied in, so a
// spectrum on the dual grid can be compared directly with closed-form
// characteristic functions.

//! Dual frequency grid of a space grid with N points: t_k = (k - N/2) dt,
//! dt = 2 pi / (N step).
GridSpectrum frequency_grid(const GridSpec& space);

//! Nyquist frequency pi / step.
double nyquist(const GridSpec& space);

GridSpectrum grid_fft(const GridFunction1D& f);
GridSpectrum grid_fft(const GridSpec& space, const std::vector<cplx>& values);

//! Inverse transform onto the space grid with the given origin. The spectrum
//! must live on the dual grid of a space grid with the same length.
std::vector<cplx> grid_ifft_complex(const GridSpectrum& s, double x_origin);

//! Real part of the inverse transform; throws ImagTooLarge when the imaginary
//! part exceeds `imag_tol` (pass a negative value to skip the check).
GridFunction1D grid_ifft(const GridSpectrum& s,
                         double x_origin,
                         GridKind kind = GridKind::signed_fn,
                         double imag_tol = -1.0);

//! Tabulates a spectrum given by a closed form on the dual grid of `space`.
GridSpectrum tabulate_spectrum(const GridSpec& space,
                               const std::function<cplx(double)>& fn);

//! Periodic convolution f * g on f's grid; both inputs share step and length.
GridFunction1D convolve(const GridFunction1D& f, const GridFunction1D& g);

//! Multiplies the spectrum of f by `multiplier(t)` and transforms back.
GridFunction1D apply_multiplier(const GridFunction1D& f,
                                const std::function<cplx(double)>& multiplier);

//! CDF on `space` of a law with characteristic function `cf` and mean `mean`.
//! Inverts (cf(t) - g(t)) / (-it) against a Gaussian reference g centred at
//! the mean and adds the reference CDF back, which removes the pole at t = 0.
GridFunction1D cdf_from_cf(const GridSpec& space,
                           const std::function<cplx(double)>& cf,
                           double mean,
                           double reference_sd = 1.0);

//! Same, starting from already tabulated spectrum values on the dual grid.
GridFunction1D cdf_from_spectrum(const GridSpec& space,
                                 const GridSpectrum& spectrum,
                                 double mean,
                                 double reference_sd = 1.0);

//! Two-dimensional inverse transform of a row-major n x n spectrum on the
//! tensor dual grid of `space` (the same 1-D grid on both axes). Returns the
//! real part, row-major, and the maximum imaginary magnitude in `max_imag`.
std::vector<double> grid_ifft_2d(const GridSpec& space,
                                 const std::vector<cplx>& spectrum,
                                 double* max_imag = nullptr);

} // namespace wdeconv
