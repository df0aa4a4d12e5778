#pragma once

#include "wdeconv/grid.hpp"
#include "wdeconv/matrix.hpp"
#include "wdeconv/rng.hpp"

#include <json.hpp>

#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace wdeconv {

//! A one-dimensional signal law with closed-form or tabulated density.
class Truth1D
{
public:
  enum class Kind
  {
    Gaussian,
    GaussianMixture,
    Laplace,
    Tabulated,
    Custom
  };

  struct Callbacks
  {
    std::function<double(double)> pdf;
    std::function<double(double)> cdf;
    std::function<std::complex<double>(double)> cf;
    std::function<double(Rng&)> sample;
    double mean = 0.0;
    double variance = 1.0;
  };

  static Truth1D gaussian(double mean = 0.0, double sd = 1.0);
  static Truth1D mixture(std::vector<double> weights,
                         std::vector<double> means,
                         std::vector<double> sds);
  static Truth1D laplace(double loc = 0.0, double scale = 1.0);
  //! Density tabulated on a grid; renormalised to unit trapezoid mass.
  static Truth1D tabulated(GridFunction1D density, std::string label = "tabulated");
  static Truth1D custom(std::string label, Callbacks callbacks);

  Kind kind() const { return kind_; }
  const std::string& name() const { return name_; }

  double pdf(double x) const;
  double cdf(double x) const;
  std::complex<double> cf(double t) const;
  double mean() const;
  double variance() const;
  double sample(Rng& rng) const;
  std::vector<double> sample(std::size_t n, Rng& rng) const;

  GridFunction1D pdf_on(const GridSpec& grid) const;
  GridFunction1D cdf_on(const GridSpec& grid) const;

  // mixture parameters (a Gaussian is a one-component mixture)
  const std::vector<double>& weights() const { return w_; }
  const std::vector<double>& means() const { return m_; }
  const std::vector<double>& sds() const { return s_; }

private:
  Kind kind_ = Kind::Gaussian;
  std::string name_;
  std::vector<double> w_, m_, s_;
  double loc_ = 0.0, scale_ = 1.0;
  GridFunction1D density_, cdf_;
  Callbacks custom_;
};

//! Law of X in R^d with independent coordinates.
struct Truth
{
  std::vector<Truth1D> coords;

  std::size_t dim() const { return coords.size(); }
  Matrix sample(std::size_t n, Rng& rng) const;
  std::complex<double> cf(const std::vector<double>& t) const;
  //! CDF of v . X tabulated on `grid`.
  GridFunction1D sliced_cdf(const std::vector<double>& v, const GridSpec& grid) const;
};

//! Parses {"name": "gaussian" | "gaussian-mixture" | "laplace-tailed" |
//! "lowerbound-family", ...}; "dim" replicates the law over coordinates.
Truth truth_from_json(const nlohmann::json& j);

double normal_pdf(double z);
double normal_cdf(double z);

} // namespace wdeconv
