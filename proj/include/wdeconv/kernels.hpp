#pragma once

#include "wdeconv/grid.hpp"

#include <string>
#include <vector>

namespace wdeconv {

enum class KernelKind
{
  FlatTop,     // spectrum 1 on [-1, 1], 0 outside [-2, 2]
  HigherOrder, // spectrum supported on [-1, 1], moments vanish up to `order`
  Tau1715      // spectrum 1 on (-1, 1), 0 outside [-17/15, 17/15]
};

struct KernelSpec
{
  KernelKind kind = KernelKind::FlatTop;
  int order = 2;

  static KernelSpec flat_top() { return { KernelKind::FlatTop, 0 }; }
  static KernelSpec tau1715() { return { KernelKind::Tau1715, 0 }; }
  static KernelSpec higher_order(int order) { return { KernelKind::HigherOrder, order }; }

  //! Right end of the spectral support.
  double support() const;
};

std::string to_string(KernelKind kind);
KernelKind kernel_kind_from_string(const std::string& s);

//! C-infinity step from 0 (u <= 0) to 1 (u >= 1): B(u) / (B(u) + B(1 - u)),
//! B(u) = exp(-1/u) for u > 0.
double smoothstep(double u);

//! Spectrum K^(t) of the kernel.
double spectrum(const KernelSpec& spec, double t);

//! Coefficients of the polynomial factor of the higher-order spectrum, in
//! powers of t^2.
std::vector<double> higher_order_coefficients(int order);

//! K_h(x) = K(x/h)/h tabulated on `grid` by inverse transform of K^(h t).
//! Throws GridTooNarrow when |K_h| exceeds `edge_tol` at the grid ends and
//! BandTooWide when the spectrum is not resolved by the grid.
GridFunction1D spatial_kernel(const KernelSpec& spec,
                              const GridSpec& grid,
                              double h = 1.0,
                              double edge_tol = 1e-8);

//! chi(t) = 1 on [-1, 1], e exp(-1/(1 - (|t|-1)^2)) on 1 < |t| < 2, 0 beyond.
double bump_chi(double t);

//! Inverse transform of (-it)^alpha f^(t), principal branch. The Nyquist
//! coefficient is dropped. Throws SpectralDivergence when the weighted
//! spectrum has not decayed near the Nyquist frequency.
GridFunction1D fractional_derivative(const GridFunction1D& f,
                                     double alpha,
                                     double tail_tol = 1e-6);

} // namespace wdeconv
