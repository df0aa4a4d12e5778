#include "wdeconv/noise_models.hpp"
#include "wdeconv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace wdeconv {

using cplx = std::complex<double>;

double NoiseModel::beta() const
{
  switch (kind) {
    case NoiseKind::Laplace: return 2.0;
    case NoiseKind::Exponential: return 1.0;
    case NoiseKind::Gamma:
    case NoiseKind::Linnik: return shape;
  }
  return 0.0;
}

double NoiseModel::mean() const
{
  switch (kind) {
    case NoiseKind::Gamma: return shape * scale;
    case NoiseKind::Exponential: return scale;
    default: return 0.0;
  }
}

void validate(const NoiseModel& model)
{
  if (!(model.scale > 0.0) || !std::isfinite(model.scale))
    throw DomainError("noise scale must be positive");
  if (!(model.beta() > 0.0) || !std::isfinite(model.beta()))
    throw DomainError("noise shape must be positive");
  if (model.kind == NoiseKind::Linnik && model.shape > 2.0)
    throw DomainError("Linnik index must lie in (0, 2]");
}

cplx cf(const NoiseModel& m, double t)
{
  const double st = m.scale * t;
  switch (m.kind) {
    case NoiseKind::Laplace: return 1.0 / (1.0 + st * st);
    case NoiseKind::Exponential: return 1.0 / cplx(1.0, -st);
    case NoiseKind::Gamma: return std::pow(cplx(1.0, -st), -m.shape);
    case NoiseKind::Linnik: return 1.0 / (1.0 + std::pow(std::abs(st), m.shape));
  }
  return 1.0;
}

cplx reciprocal_cf(const NoiseModel& m, double t, int order)
{
  if (order != 0 && order != 1)
    throw DomainError("reciprocal_cf order must be 0 or 1");
  const double s = m.scale;
  const double st = s * t;
  switch (m.kind) {
    case NoiseKind::Laplace:
      return order == 0 ? cplx(1.0 + st * st) : cplx(2.0 * s * st);
    case NoiseKind::Exponential:
      return order == 0 ? cplx(1.0, -st) : cplx(0.0, -s);
    case NoiseKind::Gamma: {
      const cplx base(1.0, -st);
      if (order == 0)
        return std::pow(base, m.shape);
      return m.shape * std::pow(base, m.shape - 1.0) * cplx(0.0, -s);
    }
    case NoiseKind::Linnik: {
      const double a = std::abs(st);
      if (order == 0)
        return 1.0 + std::pow(a, m.shape);
      if (t == 0.0) {
        if (m.shape <= 1.0)
          throw DomainError("Linnik reciprocal is not differentiable at 0 for index <= 1");
        return 0.0;
      }
      return m.shape * s * std::pow(a, m.shape - 1.0) * (t > 0.0 ? 1.0 : -1.0);
    }
  }
  return 1.0;
}

double density(const NoiseModel& m, double u)
{
  const double s = m.scale;
  switch (m.kind) {
    case NoiseKind::Laplace: return std::exp(-std::abs(u) / s) / (2.0 * s);
    case NoiseKind::Exponential: return u < 0.0 ? 0.0 : std::exp(-u / s) / s;
    case NoiseKind::Gamma: {
      if (u <= 0.0) {
        if (u == 0.0 && m.shape < 1.0)
          return std::numeric_limits<double>::infinity();
        return (u == 0.0 && m.shape == 1.0) ? 1.0 / s : 0.0;
      }
      const double z = u / s;
      return std::exp((m.shape - 1.0) * std::log(z) - z - std::lgamma(m.shape)) / s;
    }
    case NoiseKind::Linnik:
      throw Unsupported("Linnik density evaluation");
  }
  return 0.0;
}

double sample_gamma(double shape, Rng& rng)
{
  if (shape < 1.0) {
    const double g = sample_gamma(shape + 1.0, rng);
    return g * std::pow(uniform01(rng), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = standard_normal(rng);
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform01(rng);
    if (u < 1.0 - 0.0331 * x * x * x * x)
      return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v)))
      return d * v;
  }
}

double sample_one(const NoiseModel& m, Rng& rng)
{
  switch (m.kind) {
    case NoiseKind::Laplace:
      return m.scale * (standard_exponential(rng) - standard_exponential(rng));
    case NoiseKind::Exponential: return m.scale * standard_exponential(rng);
    case NoiseKind::Gamma: return m.scale * sample_gamma(m.shape, rng);
    case NoiseKind::Linnik: throw Unsupported("Linnik sampling");
  }
  return 0.0;
}

Matrix sample_noise(const NoiseModel& m, std::size_t n, std::size_t d, Rng& rng)
{
  if (n == 0 || d == 0)
    throw DomainError("sample_noise needs n >= 1 and d >= 1");
  if (m.kind == NoiseKind::Linnik)
    throw Unsupported("Linnik sampling");
  Matrix out(n, d);
  for (auto& v : out.data)
    v = sample_one(m, rng);
  return out;
}

SmoothnessReport verify_ordinary_smooth(const NoiseModel& m,
                                        const std::vector<double>& t_grid)
{
  SmoothnessReport rep;
  if (t_grid.empty())
    return rep;
  const double beta = m.beta();
  double d0 = std::numeric_limits<double>::infinity();
  double d1 = 0.0;
  for (double t : t_grid) {
    const double w = 1.0 + std::abs(t);
    d0 = std::min(d0, std::abs(cf(m, t)) * std::pow(w, beta));
    for (int l = 0; l <= 1; ++l) {
      if (l == 1 && t == 0.0 && m.kind == NoiseKind::Linnik && m.shape <= 1.0)
        continue;
      d1 = std::max(d1, std::abs(reciprocal_cf(m, t, l)) / std::pow(w, beta - l));
    }
  }
  rep.d0_hat = d0;
  rep.d1_hat = d1;
  rep.pass = std::isfinite(d0) && std::isfinite(d1) && d0 > 0.0 && d1 > 0.0;
  return rep;
}

std::string to_string(NoiseKind kind)
{
  switch (kind) {
    case NoiseKind::Laplace: return "laplace";
    case NoiseKind::Gamma: return "gamma";
    case NoiseKind::Exponential: return "exponential";
    case NoiseKind::Linnik: return "linnik";
  }
  return "unknown";
}

NoiseKind noise_kind_from_string(const std::string& s)
{
  if (s == "laplace") return NoiseKind::Laplace;
  if (s == "gamma") return NoiseKind::Gamma;
  if (s == "exponential") return NoiseKind::Exponential;
  if (s == "linnik") return NoiseKind::Linnik;
  throw ConfigError("unknown noise kind '" + s + "'");
}

nlohmann::json to_json(const NoiseModel& m)
{
  nlohmann::json j;
  j["kind"] = to_string(m.kind);
  j["scale"] = m.scale;
  if (m.kind == NoiseKind::Gamma || m.kind == NoiseKind::Linnik)
    j["shape"] = m.shape;
  else
    j["shape"] = nullptr;
  return j;
}

NoiseModel noise_from_json(const nlohmann::json& j)
{
  if (!j.is_object() || !j.contains("kind"))
    throw ConfigError("noise model needs a \"kind\" field");
  NoiseModel m;
  m.kind = noise_kind_from_string(j.at("kind").get<std::string>());
  if (j.contains("scale") && !j.at("scale").is_null())
    m.scale = j.at("scale").get<double>();
  if (j.contains("shape") && !j.at("shape").is_null())
    m.shape = j.at("shape").get<double>();
  else if (m.kind == NoiseKind::Gamma || m.kind == NoiseKind::Linnik)
    throw ConfigError("gamma and linnik noise need a \"shape\"");
  try {
    validate(m);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return m;
}

} // namespace wdeconv
