#pragma once

#include "wdeconv/grid.hpp"
#include "wdeconv/noise_models.hpp"
#include "wdeconv/rng.hpp"

#include <vector>

namespace wdeconv {

//! Heavy-tailed base density perturbed by b scaled copies of a band-limited
//! kernel: f0r(x) + C b^-alpha sum_s theta_s H(b (x - (s-1)/b)).
struct PerturbedFamilySpec
{
  double r = 1.25;
  double alpha = 1.0;
  double C = 0.0; // 0 selects default_amplitude(r, alpha, b)
  int b = 8;
  std::vector<int> theta; // length b, entries in {0, 1}; empty means zeros

  //! Amplitude actually used (resolves C = 0).
  double amplitude() const;
};

void validate(const PerturbedFamilySpec& spec);

//! C_r (1 + x^2)^-r with C_r = Gamma(r) / (sqrt(pi) Gamma(r - 1/2)).
double base_density_f0r(double r, double x);
double base_cdf_f0r(double r, double x);
//! Exact Fourier transform 2^{3/2-r} / Gamma(r-1/2) |t|^{r-1/2} K_{r-1/2}(|t|).
double base_cf_f0r(double r, double t);
//! exp(-|t|^{2r-1}): matches the exact transform only to leading order as t -> 0.
double base_cf_f0r_small_t(double r, double t);
//! First absolute moment C_r / (r - 1).
double base_first_moment_f0r(double r);
double sample_f0r(double r, Rng& rng);

//! Even C-infinity bump supported on 1 <= |t| <= 2, equal to 1 at |t| = 3/2.
double fan_kernel_spectrum(double t);
//! H(x) = (1/pi) int_1^2 cos(t x) H^(t) dt.
double fan_kernel_H(double x);
//! int_{-inf}^x H = (1/pi) int_1^2 H^(t) sin(t x) / t dt.
double fan_kernel_primitive(double x);

double perturbed_density(const PerturbedFamilySpec& spec, double x);
double perturbed_cdf(const PerturbedFamilySpec& spec, double x);
std::complex<double> perturbed_cf(const PerturbedFamilySpec& spec, double t);
//! Tabulates f_theta on `grid` (perturbation through an exact band-limited
//! inverse transform).
GridFunction1D perturbed_density_on(const PerturbedFamilySpec& spec, const GridSpec& grid);
//! f_theta convolved with the noise law, tabulated on `grid`.
GridFunction1D convolved_density_on(const PerturbedFamilySpec& spec,
                                    const NoiseModel& noise,
                                    const GridSpec& grid);
//! Exact draw by rejection from the base density.
double sample_perturbed(const PerturbedFamilySpec& spec, double envelope, Rng& rng);
//! Bound M with f_theta <= M f0r, for rejection sampling.
double rejection_envelope(const PerturbedFamilySpec& spec);

//! Largest C with f0r - C b^-alpha sum_s |H(b(x - x_s))| >= 0, times 0.9.
double default_amplitude(double r, double alpha, int b);

//! Chi-square divergence int (h0 - h1)^2 / h0. Points where h0 <= 0 are
//! skipped when h1 is also zero there, otherwise SupportMismatch.
double chi2_divergence(const GridFunction1D& h0, const GridFunction1D& h1);

struct FamilyReport
{
  bool is_density = false;
  double integral = 0.0;
  double min_value = 0.0;
  double m1_bound = 0.0;
  double sobolev_norm = 0.0; // int (1 + t^2)^alpha |f^(t)|^2 dt
  bool pass = false;
};

FamilyReport verify_family(const PerturbedFamilySpec& spec);

//! Chi-square divergence between the noisy versions of f_theta and the
//! family member with bit `s` (1-based) flipped.
double single_flip_chi2(const PerturbedFamilySpec& spec, const NoiseModel& noise, int s);

} // namespace wdeconv
