#include "wdeconv/errors.hpp"
#include "wdeconv/noise_models.hpp"

#include <doctest.h>

#include <cmath>

using namespace wdeconv;

TEST_CASE("characteristic function values")
{
  CHECK(std::abs(cf(NoiseModel::laplace(), 1.0) - std::complex<double>(0.5, 0.0)) < 1e-15);
  CHECK(std::abs(cf(NoiseModel::gamma(1.0), 1.0) - std::complex<double>(0.5, 0.5)) < 1e-15);
  for (const auto& m : { NoiseModel::laplace(2.0), NoiseModel::gamma(2.5), NoiseModel::exponential(0.5),
                         NoiseModel::linnik(1.5) })
    CHECK(std::abs(cf(m, 0.0) - 1.0) < 1e-15);
}

TEST_CASE("reciprocal characteristic function")
{
  const auto lap = NoiseModel::laplace();
  CHECK(reciprocal_cf(lap, 2.0).real() == doctest::Approx(5.0));
  CHECK(reciprocal_cf(lap, 0.0).real() == doctest::Approx(1.0));
  CHECK(reciprocal_cf(lap, 3.0, 1).real() == doctest::Approx(6.0));
}

TEST_CASE("densities")
{
  CHECK(density(NoiseModel::laplace(), 0.0) == doctest::Approx(0.5));
  CHECK(density(NoiseModel::laplace(), 1.0) == doctest::Approx(0.18393972058572117));
  CHECK(density(NoiseModel::exponential(), -1.0) == 0.0);
  CHECK_THROWS_AS(density(NoiseModel::linnik(1.5), 0.0), Unsupported);
}

TEST_CASE("sampling is reproducible for a fixed seed")
{
  Rng a(42), b(42);
  const Matrix x = sample_noise(NoiseModel::laplace(), 3, 2, a);
  const Matrix y = sample_noise(NoiseModel::laplace(), 3, 2, b);
  CHECK(x.rows == 3);
  CHECK(x.cols == 2);
  CHECK(x.data == y.data);
}

TEST_CASE("laplace sample moments")
{
  Rng rng(7);
  const Matrix x = sample_noise(NoiseModel::laplace(), 100000, 1, rng);
  double mean = 0.0, sq = 0.0;
  for (double v : x.data)
    mean += v;
  mean /= x.data.size();
  for (double v : x.data)
    sq += (v - mean) * (v - mean);
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(sq / (x.data.size() - 1) - 2.0) < 0.1);
}

TEST_CASE("ordinary smoothness report")
{
  std::vector<double> t;
  for (int k = -1000; k <= 1000; ++k)
    t.push_back(0.1 * k);
  const auto lap = verify_ordinary_smooth(NoiseModel::laplace(), t);
  CHECK(lap.pass);
  CHECK(lap.d0_hat >= 0.5 - 1e-12);
  CHECK(lap.d0_hat <= 1.0 + 1e-12);
  CHECK(verify_ordinary_smooth(NoiseModel::gamma(2.0), t).pass);
  CHECK_FALSE(verify_ordinary_smooth(NoiseModel::laplace(), {}).pass);
}

TEST_CASE("derivative of the reciprocal matches finite differences")
{
  for (const auto& m : { NoiseModel::laplace(), NoiseModel::gamma(1.7, 0.8), NoiseModel::exponential(2.0),
                         NoiseModel::linnik(1.5, 1.2) }) {
    for (double t : { -3.0, -0.7, 0.4, 2.5 }) {
      const double e = 1e-4;
      const auto fd = (reciprocal_cf(m, t + e) - reciprocal_cf(m, t - e)) / (2.0 * e);
      CHECK(std::abs(fd - reciprocal_cf(m, t, 1)) < 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("characteristic functions are hermitian and never vanish")
{
  for (const auto& m : { NoiseModel::laplace(1.5), NoiseModel::gamma(2.5), NoiseModel::exponential(),
                         NoiseModel::linnik(0.8) }) {
    for (double t = -50.0; t <= 50.0; t += 0.37) {
      CHECK(std::abs(cf(m, -t) - std::conj(cf(m, t))) < 1e-14);
      CHECK(std::abs(cf(m, t)) > 0.0);
    }
  }
}

TEST_CASE("sample histograms match the density")
{
  for (const auto& m : { NoiseModel::laplace(), NoiseModel::gamma(2.0), NoiseModel::exponential(0.5) }) {
    Rng rng(11);
    const std::size_t n = 200000;
    const Matrix x = sample_noise(m, n, 1, rng);
    const double lo = -12.0, width = 0.1;
    std::vector<double> counts(240, 0.0);
    for (double v : x.data) {
      const auto k = static_cast<long>(std::floor((v - lo) / width));
      if (k >= 0 && k < static_cast<long>(counts.size()))
        counts[k] += 1.0;
    }
    double l1 = 0.0;
    for (std::size_t k = 0; k < counts.size(); ++k) {
      const double mid = lo + (k + 0.5) * width;
      l1 += std::abs(counts[k] / (n * width) - density(m, mid)) * width;
    }
    // binning bias of the midpoint rule plus sampling error
    CHECK(l1 < 5.0 / std::sqrt(static_cast<double>(n)) + 0.01);
  }
}

TEST_CASE("json round trip and validation")
{
  const auto m = NoiseModel::gamma(2.5, 0.7);
  const auto back = noise_from_json(to_json(m));
  CHECK(back.kind == m.kind);
  CHECK(back.scale == m.scale);
  CHECK(back.shape == m.shape);
  CHECK(to_json(NoiseModel::laplace())["shape"].is_null());
  CHECK_THROWS_AS(noise_from_json({ { "kind", "gaussian" } }), ConfigError);
  CHECK_THROWS_AS(validate(NoiseModel::laplace(-1.0)), DomainError);
  CHECK(NoiseModel::laplace().beta() == 2.0);
  CHECK(NoiseModel::gamma(3.0).beta() == 3.0);
}
