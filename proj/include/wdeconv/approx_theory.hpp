#pragma once

#include "wdeconv/grid.hpp"
#include "wdeconv/kernels.hpp"
#include "wdeconv/noise_models.hpp"
#include "wdeconv/truth.hpp"

#include <functional>
#include <vector>

namespace wdeconv {

//! delta = c_delta sigma and h = c_h |log sigma|^{-1/2} in the T construction.
struct ApproxConstants
{
  double c_delta = 0.5;
  double c_h = 0.1;
};

//! (tau * phi_h)(s) with tau the Tau1715 spectrum; this is the spectrum of H.
double tau_phi(double s, double h);
//! H(x) = (2 pi)^{-1} tau^(x) exp(-(h x)^2 / 2).
double kernel_H(double x, double h);

//! f + sum_{k=1}^{m-1} (-sigma^2/2)^k / k! sum_j C(2k, j) (-b)^{2k-j}
//! [f * (e^{-b.} D^j H_delta)], with every convolution done on f's grid.
//! m = 1 returns f unchanged.
GridFunction1D operator_T(const GridFunction1D& f,
                          int m,
                          double b,
                          double sigma,
                          const ApproxConstants& c = {});

//! e^{b.} f0 / M(b) with M(b) = int e^{b x} f0(x) dx.
GridFunction1D tilted_density(const GridFunction1D& f0, double b, double* mass = nullptr);

//! (1/gamma) sum_k ... (hbar * D^j H_delta), gamma = -(1 - e^{-sigma^2/8}),
//! evaluated in the frequency domain.
GridFunction1D h_m_b_sigma(const GridFunction1D& f0,
                           int m,
                           double b,
                           double sigma,
                           const ApproxConstants& c = {});

double approx_gamma(double sigma);

//! Max abs deviation between e^{b.} T f0 / M(b) and hbar + gamma h.
double identity_residual(const GridFunction1D& f0,
                         int m,
                         double b,
                         double sigma,
                         const ApproxConstants& c = {});

//! sum over b = -1/2, +1/2 of ||e^{b.} {f_eps * [phi_sigma * (T f0) - f0]}||_2^2
//! for standard Laplace noise, through the frequency-domain expression.
double approx_error_L2(const GridFunction1D& f0, int m, double sigma, const ApproxConstants& c = {});
//! Same quantity computed in space, for cross-checking.
double approx_error_L2_direct(const GridFunction1D& f0,
                              int m,
                              double sigma,
                              const ApproxConstants& c = {});

struct BiasReport
{
  double value = 0.0;
  bool precondition_ok = true;
};

//! ||F - F * K_h||_1 for the law with characteristic function `cf`.
double cdf_bias_norm(const std::function<std::complex<double>(double)>& cf,
                     const KernelSpec& kernel,
                     double h,
                     const GridSpec& grid);
//! Gaussian-mixture route; checks min sd >= h sqrt((2 alpha + 1) |log h|).
//! With `strict` a failed check throws PreconditionViolated.
BiasReport cdf_bias_norm(const Truth1D& mixture,
                         const KernelSpec& kernel,
                         double h,
                         double alpha,
                         const GridSpec& grid,
                         bool strict = false);
//! Tabulated CDF route.
double cdf_bias_norm(const GridFunction1D& cdf, const KernelSpec& kernel, double h);

//! |log h| (|log h| 1{beta |I| <= 1} + h^{1 - beta |I|} prod_{j in I} |v_j|^beta
//! 1{beta |I| > 1}) with I = {j : |v_j| > h}. Natural log.
double t_term_multiplier(const std::vector<double>& v, double h, double beta);

struct InversionRow
{
  double h = 0.0;
  double lhs = 0.0;
  double bias_term = 0.0;
  double w1_y_term = 0.0;
  double T_term = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
};

struct InversionReport
{
  std::vector<double> h_values;
  std::vector<InversionRow> rows;
};

//! d = 1: lhs = W1(mu_X, mu_0X) from the two densities on a common grid, the
//! Y densities by exact spectral convolution with the noise. With
//! `smooth_alpha` > 0 the bias term is h^{alpha + 1} instead of h.
InversionReport inversion_rhs(const GridFunction1D& fX,
                              const GridFunction1D& f0X,
                              const NoiseModel& noise,
                              const std::vector<double>& h_values,
                              double smooth_alpha = 0.0);

} // namespace wdeconv
