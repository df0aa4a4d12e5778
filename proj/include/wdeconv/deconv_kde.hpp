#pragma once

#include "wdeconv/grid.hpp"
#include "wdeconv/kernels.hpp"
#include "wdeconv/matrix.hpp"
#include "wdeconv/noise_models.hpp"
#include "wdeconv/wasserstein.hpp"

#include <complex>
#include <functional>
#include <optional>
#include <vector>

namespace wdeconv {

enum class BandwidthRule
{
  Auto,   // logged for Laplace noise, plain otherwise
  Plain,  // n^{-1/(2 beta d + 1)}
  Logged, // [n / (log n)^3]^{-1/(4d + 1)}
  Fixed   // DeconvConfig::bandwidth
};

struct DeconvConfig
{
  BandwidthRule rule = BandwidthRule::Auto;
  double bandwidth = 0.0; // used when rule == Fixed, must lie in (0, 1]
  GridSpec grid = GridSpec::centered(20.0, 2048);
  std::size_t dimension = 1;
  KernelSpec kernel = KernelSpec::tau1715();
  double direction_net_resolution = 0.05;
  double projection_tolerance = 1e-8;
  double imag_tolerance = 1e-8;
  // global surrogate measure (d = 2)
  std::size_t surrogate_grid_length = 64;
  double surrogate_half_width = 6.0;
  int surrogate_max_iterations = 200;
};

void validate(const DeconvConfig& cfg);

//! 1/f^_eps and E[eps] for the noise being removed. `identity()` turns the
//! estimator into plain kernel smoothing.
struct InverseFilter
{
  std::function<std::complex<double>(double)> reciprocal;
  double mean = 0.0;
  double beta = 0.0;

  static InverseFilter from_noise(const NoiseModel& model);
  static InverseFilter identity();
};

struct DirectionEstimate
{
  std::vector<double> direction;
  GridFunction1D raw_cdf;
  GridFunction1D projected_cdf;
};

struct DeconvDiagnostics
{
  double negative_mass = 0.0;
  double projection_distance = 0.0;
  double runtime_ms = 0.0;
  bool surrogate = false;
  int surrogate_iterations = 0;
  double surrogate_objective = 0.0;
};

struct DeconvEstimate
{
  std::size_t dimension = 1;
  GridFunction1D raw_density; // d = 1
  GridFunction1D raw_cdf;     // d = 1, or the first net direction for d = 2
  GridFunction1D projected_cdf;
  double bandwidth = 0.0;
  //! d = 1: atoms at grid points with the increments of projected_cdf;
  //! d = 2: surrogate global measure on a tensor grid.
  EmpiricalMeasure measure;
  std::vector<DirectionEstimate> per_direction; // d = 2
  DeconvDiagnostics diagnostics;
};

//! (1/n) sum_j exp(i t v.Y_j) for each t.
std::vector<std::complex<double>> empirical_cf(const Matrix& Y,
                                               const std::vector<double>& t_grid,
                                               const std::vector<double>& v);

double default_bandwidth(std::size_t n, double beta, std::size_t d, BandwidthRule variant);
double resolve_bandwidth(const DeconvConfig& cfg, std::size_t n, const NoiseModel& model);

//! Spectrum of the sliced estimate along v on the dual grid of `grid`:
//! prod_j K^(b v_j t) phi_n(t v) prod_j r(v_j t). Zero outside the band.
GridSpectrum estimator_spectrum(const Matrix& Y,
                                const InverseFilter& filter,
                                const KernelSpec& kernel,
                                double bandwidth,
                                const GridSpec& grid,
                                const std::vector<double>& v);

GridFunction1D deconvolve_density_1d(const std::vector<double>& Y,
                                     const NoiseModel& model,
                                     const DeconvConfig& cfg);
GridFunction1D deconvolve_density_1d(const std::vector<double>& Y,
                                     const InverseFilter& filter,
                                     const DeconvConfig& cfg,
                                     double bandwidth);

//! Raw CDF of the projection of the estimate on v (any d; d = 1 uses v = (1)).
GridFunction1D sliced_raw_cdf(const Matrix& Y,
                              const NoiseModel& model,
                              const DeconvConfig& cfg,
                              const std::vector<double>& v);
GridFunction1D sliced_raw_cdf(const Matrix& Y,
                              const InverseFilter& filter,
                              const DeconvConfig& cfg,
                              double bandwidth,
                              const std::vector<double>& v);

//! Closest nondecreasing function with values in [0, 1] and end values 0 and
//! 1 in the L1 grid distance (median pool-adjacent-violators).
GridFunction1D project_to_cdf(const GridFunction1D& raw, double tol = 1e-8);

//! Plain L1 isotonic regression with uniform weights; blocks take the median
//! of their pooled values (midpoint for even counts).
std::vector<double> isotonic_l1(const std::vector<double>& y);

DeconvEstimate deconvolve(const Matrix& Y, const NoiseModel& model, const DeconvConfig& cfg);
DeconvEstimate deconvolve(const Matrix& Y,
                          const InverseFilter& filter,
                          const DeconvConfig& cfg,
                          double bandwidth);

//! Exact int |F - G| for a piecewise-linear grid CDF F (0 left of the grid,
//! 1 right of it) and the step CDF G of a one-dimensional measure.
double w1_cdf_vs_measure(const GridFunction1D& cdf, const EmpiricalMeasure& m);

//! d = 1 risk against a tabulated truth CDF on the estimate's grid.
double w1_risk(const DeconvEstimate& est, const GridFunction1D& truth_cdf);
//! Risk against a sample of the truth (d = 1 exact; d = 2 max over the net).
double w1_risk(const DeconvEstimate& est, const EmpiricalMeasure& truth);
//! d = 2 risk against sliced truth CDFs: max over the net directions.
double w1_risk(const DeconvEstimate& est,
               const std::function<GridFunction1D(const std::vector<double>&, const GridSpec&)>& sliced_truth);

} // namespace wdeconv
