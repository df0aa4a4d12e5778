#pragma once

#include "wdeconv/matrix.hpp"
#include "wdeconv/rng.hpp"

#include <json.hpp>

#include <complex>
#include <string>
#include <vector>

namespace wdeconv {

enum class NoiseKind
{
  Laplace,
  Gamma,
  Exponential,
  Linnik
};

//! Known ordinary-smooth error law. `shape` is the gamma/Linnik index and is
//! ignored by Laplace and Exponential.
struct NoiseModel
{
  NoiseKind kind = NoiseKind::Laplace;
  double scale = 1.0;
  double shape = 1.0;

  //! Ordinary-smoothness exponent.
  double beta() const;
  //! E[eps] (zero for the symmetric kinds).
  double mean() const;

  static NoiseModel laplace(double scale = 1.0) { return { NoiseKind::Laplace, scale, 1.0 }; }
  static NoiseModel gamma(double shape, double scale = 1.0) { return { NoiseKind::Gamma, scale, shape }; }
  static NoiseModel exponential(double scale = 1.0) { return { NoiseKind::Exponential, scale, 1.0 }; }
  static NoiseModel linnik(double index, double scale = 1.0) { return { NoiseKind::Linnik, scale, index }; }
};

void validate(const NoiseModel& model);

std::complex<double> cf(const NoiseModel& model, double t);

//! 1 / cf (order 0) or its derivative in t (order 1).
std::complex<double> reciprocal_cf(const NoiseModel& model, double t, int order = 0);

double density(const NoiseModel& model, double u);

//! n x d matrix of i.i.d. draws.
Matrix sample_noise(const NoiseModel& model, std::size_t n, std::size_t d, Rng& rng);
double sample_one(const NoiseModel& model, Rng& rng);

struct SmoothnessReport
{
  double d0_hat = 0.0;
  double d1_hat = 0.0;
  bool pass = false;
};

//! Empirical constants of the ordinary-smoothness bounds on `t_grid`:
//! d0 = inf |cf(t)| (1+|t|)^beta, d1 = sup_l |r^{(l)}(t)| / (1+|t|)^{beta-l}.
SmoothnessReport verify_ordinary_smooth(const NoiseModel& model,
                                        const std::vector<double>& t_grid);

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& s);

nlohmann::json to_json(const NoiseModel& model);
NoiseModel noise_from_json(const nlohmann::json& j);

//! Marsaglia-Tsang gamma variate with unit scale.
double sample_gamma(double shape, Rng& rng);

} // namespace wdeconv
