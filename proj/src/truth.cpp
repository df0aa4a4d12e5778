#include "wdeconv/truth.hpp"
#include "wdeconv/errors.hpp"
#include "wdeconv/fourier.hpp"
#include "wdeconv/lower_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace wdeconv {

double normal_pdf(double z)
{
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double z)
{
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

Truth1D Truth1D::gaussian(double mean, double sd)
{
  Truth1D t = mixture({ 1.0 }, { mean }, { sd });
  t.kind_ = Kind::Gaussian;
  t.name_ = "gaussian";
  return t;
}

Truth1D Truth1D::mixture(std::vector<double> weights,
                         std::vector<double> means,
                         std::vector<double> sds)
{
  if (weights.empty() || weights.size() != means.size() || weights.size() != sds.size())
    throw DomainError("mixture needs matching non-empty weights, means and sds");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (!(weights[k] >= 0.0) || !(sds[k] > 0.0))
      throw DomainError("mixture weights must be nonnegative and sds positive");
    weights[k] /= total;
  }
  Truth1D t;
  t.kind_ = Kind::GaussianMixture;
  t.name_ = "gaussian-mixture";
  t.w_ = std::move(weights);
  t.m_ = std::move(means);
  t.s_ = std::move(sds);
  return t;
}

Truth1D Truth1D::laplace(double loc, double scale)
{
  if (!(scale > 0.0))
    throw DomainError("laplace scale must be positive");
  Truth1D t;
  t.kind_ = Kind::Laplace;
  t.name_ = "laplace-tailed";
  t.loc_ = loc;
  t.scale_ = scale;
  return t;
}

Truth1D Truth1D::tabulated(GridFunction1D density, std::string label)
{
  for (auto& v : density.values)
    v = std::max(0.0, v);
  const double mass = trapezoid(density);
  if (!(mass > 0.0))
    throw DomainError("tabulated density has no mass");
  for (auto& v : density.values)
    v /= mass;
  density.kind = GridKind::density;
  Truth1D t;
  t.kind_ = Kind::Tabulated;
  t.name_ = std::move(label);
  t.cdf_ = cumulative_trapezoid(density);
  t.cdf_.kind = GridKind::cdf;
  t.cdf_.values.back() = 1.0;
  t.density_ = std::move(density);
  return t;
}

Truth1D Truth1D::custom(std::string label, Callbacks callbacks)
{
  Truth1D t;
  t.kind_ = Kind::Custom;
  t.name_ = std::move(label);
  t.custom_ = std::move(callbacks);
  return t;
}

double Truth1D::pdf(double x) const
{
  switch (kind_) {
    case Kind::Gaussian:
    case Kind::GaussianMixture: {
      double s = 0.0;
      for (std::size_t k = 0; k < w_.size(); ++k)
        s += w_[k] * normal_pdf((x - m_[k]) / s_[k]) / s_[k];
      return s;
    }
    case Kind::Laplace: return std::exp(-std::abs(x - loc_) / scale_) / (2.0 * scale_);
    case Kind::Tabulated: {
      if (x < density_.origin || x > density_.x(density_.size() - 1))
        return 0.0;
      return density_.at(x);
    }
    case Kind::Custom: return custom_.pdf(x);
  }
  return 0.0;
}

double Truth1D::cdf(double x) const
{
  switch (kind_) {
    case Kind::Gaussian:
    case Kind::GaussianMixture: {
      double s = 0.0;
      for (std::size_t k = 0; k < w_.size(); ++k)
        s += w_[k] * normal_cdf((x - m_[k]) / s_[k]);
      return s;
    }
    case Kind::Laplace: {
      const double z = (x - loc_) / scale_;
      return z < 0.0 ? 0.5 * std::exp(z) : 1.0 - 0.5 * std::exp(-z);
    }
    case Kind::Tabulated: {
      if (x <= cdf_.origin)
        return 0.0;
      return cdf_.at(x);
    }
    case Kind::Custom: return custom_.cdf(x);
  }
  return 0.0;
}

std::complex<double> Truth1D::cf(double t) const
{
  switch (kind_) {
    case Kind::Gaussian:
    case Kind::GaussianMixture: {
      std::complex<double> s = 0.0;
      for (std::size_t k = 0; k < w_.size(); ++k)
        s += w_[k] * std::exp(std::complex<double>(-0.5 * s_[k] * s_[k] * t * t, t * m_[k]));
      return s;
    }
    case Kind::Laplace: {
      const double st = scale_ * t;
      return std::exp(std::complex<double>(0.0, t * loc_)) / (1.0 + st * st);
    }
    case Kind::Tabulated: {
      std::complex<double> s = 0.0;
      for (std::size_t i = 0; i < density_.size(); ++i) {
        const double w = (i == 0 || i + 1 == density_.size()) ? 0.5 : 1.0;
        s += w * density_.values[i] * std::exp(std::complex<double>(0.0, t * density_.x(i)));
      }
      return s * density_.step;
    }
    case Kind::Custom: return custom_.cf(t);
  }
  return 1.0;
}

double Truth1D::mean() const
{
  switch (kind_) {
    case Kind::Gaussian:
    case Kind::GaussianMixture: {
      double s = 0.0;
      for (std::size_t k = 0; k < w_.size(); ++k)
        s += w_[k] * m_[k];
      return s;
    }
    case Kind::Laplace: return loc_;
    case Kind::Tabulated: {
      GridFunction1D xf = density_;
      for (std::size_t i = 0; i < xf.size(); ++i)
        xf.values[i] *= xf.x(i);
      return trapezoid(xf);
    }
    case Kind::Custom: return custom_.mean;
  }
  return 0.0;
}

double Truth1D::variance() const
{
  switch (kind_) {
    case Kind::Gaussian:
    case Kind::GaussianMixture: {
      const double mu = mean();
      double s = 0.0;
      for (std::size_t k = 0; k < w_.size(); ++k)
        s += w_[k] * (s_[k] * s_[k] + (m_[k] - mu) * (m_[k] - mu));
      return s;
    }
    case Kind::Laplace: return 2.0 * scale_ * scale_;
    case Kind::Tabulated: {
      const double mu = mean();
      GridFunction1D xf = density_;
      for (std::size_t i = 0; i < xf.size(); ++i)
        xf.values[i] *= (xf.x(i) - mu) * (xf.x(i) - mu);
      return trapezoid(xf);
    }
    case Kind::Custom: return custom_.variance;
  }
  return 1.0;
}

double Truth1D::sample(Rng& rng) const
{
  switch (kind_) {
    case Kind::Gaussian: return m_[0] + s_[0] * standard_normal(rng);
    case Kind::GaussianMixture: {
      const double u = uniform01(rng);
      double acc = 0.0;
      std::size_t k = 0;
      for (; k + 1 < w_.size(); ++k) {
        acc += w_[k];
        if (u < acc)
          break;
      }
      return m_[k] + s_[k] * standard_normal(rng);
    }
    case Kind::Laplace:
      return loc_ + scale_ * (standard_exponential(rng) - standard_exponential(rng));
    case Kind::Tabulated: {
      const double u = uniform01(rng);
      const auto& c = cdf_.values;
      const auto it = std::lower_bound(c.begin(), c.end(), u);
      if (it == c.begin())
        return cdf_.origin;
      const auto i = static_cast<std::size_t>(it - c.begin());
      const double lo = c[i - 1], hi = c[i];
      const double frac = hi > lo ? (u - lo) / (hi - lo) : 0.5;
      return cdf_.x(i - 1) + frac * cdf_.step;
    }
    case Kind::Custom: return custom_.sample(rng);
  }
  return 0.0;
}

std::vector<double> Truth1D::sample(std::size_t n, Rng& rng) const
{
  std::vector<double> out(n);
  for (auto& x : out)
    x = sample(rng);
  return out;
}

GridFunction1D Truth1D::pdf_on(const GridSpec& grid) const
{
  GridFunction1D f(grid, GridKind::density);
  for (std::size_t i = 0; i < f.size(); ++i)
    f.values[i] = pdf(f.x(i));
  return f;
}

GridFunction1D Truth1D::cdf_on(const GridSpec& grid) const
{
  GridFunction1D f(grid, GridKind::cdf);
  for (std::size_t i = 0; i < f.size(); ++i)
    f.values[i] = cdf(f.x(i));
  return f;
}

Matrix Truth::sample(std::size_t n, Rng& rng) const
{
  Matrix out(n, dim());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < dim(); ++j)
      out(i, j) = coords[j].sample(rng);
  return out;
}

std::complex<double> Truth::cf(const std::vector<double>& t) const
{
  if (t.size() != dim())
    throw DimensionError("frequency and truth differ in dimension");
  std::complex<double> p = 1.0;
  for (std::size_t j = 0; j < dim(); ++j)
    p *= coords[j].cf(t[j]);
  return p;
}

GridFunction1D Truth::sliced_cdf(const std::vector<double>& v, const GridSpec& grid) const
{
  if (v.size() != dim())
    throw DimensionError("direction and truth differ in dimension");
  if (dim() == 1) {
    GridFunction1D f = coords[0].cdf_on(grid);
    if (v[0] < 0.0)
      for (std::size_t i = 0; i < f.size(); ++i)
        f.values[i] = 1.0 - coords[0].cdf(-f.x(i));
    return f;
  }
  double mean = 0.0, var = 0.0;
  for (std::size_t j = 0; j < dim(); ++j) {
    mean += v[j] * coords[j].mean();
    var += v[j] * v[j] * coords[j].variance();
  }
  const double sd = std::isfinite(var) && var > 0.0 ? std::sqrt(var) : 1.0;
  GridFunction1D f = cdf_from_cf(
    grid,
    [&](double t) {
      std::vector<double> tv(dim());
      for (std::size_t j = 0; j < dim(); ++j)
        tv[j] = v[j] * t;
      return cf(tv);
    },
    mean,
    sd);
  f.kind = GridKind::cdf;
  return f;
}

namespace {

Truth1D truth1d_from_json(const nlohmann::json& j)
{
  const std::string name = j.at("name").get<std::string>();
  if (name == "gaussian")
    return Truth1D::gaussian(j.value("mean", 0.0), j.value("sd", 1.0));
  if (name == "gaussian-mixture")
    return Truth1D::mixture(j.at("weights").get<std::vector<double>>(),
                            j.at("means").get<std::vector<double>>(),
                            j.at("sds").get<std::vector<double>>());
  if (name == "laplace-tailed")
    return Truth1D::laplace(j.value("loc", 0.0), j.value("scale", 1.0));
  if (name == "lowerbound-family") {
    PerturbedFamilySpec spec;
    spec.r = j.value("r", spec.r);
    spec.alpha = j.value("alpha", spec.alpha);
    spec.C = j.value("C", 0.0);
    spec.b = j.value("b", spec.b);
    if (j.contains("theta"))
      spec.theta = j.at("theta").get<std::vector<int>>();
    validate(spec);
    spec.C = spec.amplitude();
    const double envelope = rejection_envelope(spec);
    Truth1D::Callbacks cb;
    cb.pdf = [spec](double x) { return perturbed_density(spec, x); };
    cb.cdf = [spec](double x) { return perturbed_cdf(spec, x); };
    cb.cf = [spec](double t) { return perturbed_cf(spec, t); };
    cb.sample = [spec, envelope](Rng& rng) { return sample_perturbed(spec, envelope, rng); };
    // H is even with zero mass, so perturbations leave the mean at 0; the
    // base law has no finite variance for r < 3/2 and 1 is only a scale hint
    cb.mean = 0.0;
    cb.variance = 1.0;
    return Truth1D::custom("lowerbound-family", std::move(cb));
  }
  throw ConfigError("unknown truth '" + name + "'");
}

} // namespace

Truth truth_from_json(const nlohmann::json& j)
{
  if (!j.is_object() || !j.contains("name"))
    throw ConfigError("truth needs a \"name\" field");
  try {
    Truth t;
    const auto d = j.value("dim", std::size_t{ 1 });
    if (d < 1 || d > 2)
      throw ConfigError("truth dimension must be 1 or 2");
    for (std::size_t k = 0; k < d; ++k)
      t.coords.push_back(truth1d_from_json(j));
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad truth specification: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

} // namespace wdeconv
