#include "wdeconv/errors.hpp"
#include "wdeconv/truth.hpp"
#include "wdeconv/wasserstein.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

using namespace wdeconv;

namespace {

EmpiricalMeasure random_measure(Rng& rng, std::size_t d, std::size_t max_atoms)
{
  const std::size_t n = 1 + static_cast<std::size_t>(uniform01(rng) * max_atoms) % max_atoms;
  Matrix atoms(n, d);
  std::vector<double> w(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j)
      atoms(i, j) = 4.0 * uniform01(rng) - 2.0;
    w[i] = 0.05 + uniform01(rng);
    total += w[i];
  }
  for (double& x : w)
    x /= total;
  return { atoms, w };
}

GridFunction1D normal_cdf_on(const GridSpec& g, double shift)
{
  GridFunction1D F(g, GridKind::cdf);
  for (std::size_t i = 0; i < F.size(); ++i)
    F.values[i] = normal_cdf(F.x(i) - shift);
  return F;
}

} // namespace

TEST_CASE("one-dimensional W1 fixtures")
{
  const auto p = EmpiricalMeasure::uniform_1d({ 0.3, -1.0, 2.5 });
  CHECK(w1_empirical_1d(p, p) == 0.0);
  CHECK(w1_empirical_1d(EmpiricalMeasure::uniform_1d({ 0.0 }), EmpiricalMeasure::uniform_1d({ 0.25 })) ==
        doctest::Approx(0.25));
  CHECK(w1_empirical_1d(EmpiricalMeasure::uniform_1d({ 0.0, 2.0 }), EmpiricalMeasure::uniform_1d({ 1.0, 3.0 })) ==
        doctest::Approx(1.0));
}

TEST_CASE("W1 between grid CDFs")
{
  const GridSpec g{ -2.0, 1e-3, 4001 };
  GridFunction1D F(g, GridKind::cdf), G(g, GridKind::cdf);
  for (std::size_t i = 0; i < F.size(); ++i) {
    F.values[i] = F.x(i) >= 0.0 ? 1.0 : 0.0;
    G.values[i] = G.x(i) >= 1.0 ? 1.0 : 0.0;
  }
  CHECK(w1_cdf(F, F) == 0.0);
  CHECK(std::abs(w1_cdf(F, G) - 1.0) <= 1e-3);

  const GridSpec wide = GridSpec::centered(20.0, 4096);
  CHECK(w1_cdf(normal_cdf_on(wide, 0.0), normal_cdf_on(wide, 0.7)) == doctest::Approx(0.7).epsilon(1e-6));
  const auto r = w1_cdf_report(normal_cdf_on(GridSpec::centered(1.0, 64), 0.0), normal_cdf_on(GridSpec::centered(1.0, 64), 0.5));
  CHECK(r.left_tail_flag);
  CHECK(r.right_tail_flag);
}

TEST_CASE("projection onto a direction")
{
  Matrix atoms(2, 2);
  atoms(0, 0) = 3.0;
  atoms(0, 1) = 4.0;
  atoms(1, 0) = -1.0;
  atoms(1, 1) = 2.0;
  const auto p = EmpiricalMeasure::uniform(atoms);
  const auto q = project_measure(p, { 0.6, 0.8 });
  CHECK(q.atoms(0, 0) == doctest::Approx(5.0));
  const auto e1 = project_measure(p, { 1.0, 0.0 });
  CHECK(e1.atoms(0, 0) == 3.0);
  CHECK(e1.atoms(1, 0) == -1.0);
  double total = 0.0;
  for (double w : q.weights)
    total += w;
  CHECK(total == doctest::Approx(1.0));
  CHECK_THROWS_AS(project_measure(p, { 1.0, 1.0 }), NotUnitVector);
}

TEST_CASE("max-sliced W1 fixtures")
{
  Matrix a(1, 2), b(1, 2);
  b(0, 0) = 1.0;
  const auto p = EmpiricalMeasure::uniform(a);
  const auto q = EmpiricalMeasure::uniform(b);
  const auto net = build_direction_net(2, 0.01);
  const auto r = max_sliced_w1(p, q, net);
  CHECK(r.value == doctest::Approx(1.0));
  CHECK(std::abs(std::abs(r.argmax[0]) - 1.0) < 1e-12);
  CHECK(max_sliced_w1(p, p, net).value == 0.0);
}

TEST_CASE("exact W1 fixtures")
{
  CHECK(exact_w1_small(EmpiricalMeasure::uniform_1d({ 1.5 }), EmpiricalMeasure::uniform_1d({ -0.5 })) ==
        doctest::Approx(2.0));

  // three-atom assignment enumeration
  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    Matrix a(3, 2), b(3, 2);
    for (double& v : a.data)
      v = uniform01(rng);
    for (double& v : b.data)
      v = uniform01(rng);
    std::vector<int> perm{ 0, 1, 2 };
    double best = 1e300;
    do {
      double cost = 0.0;
      for (int i = 0; i < 3; ++i)
        cost += std::hypot(a(i, 0) - b(perm[i], 0), a(i, 1) - b(perm[i], 1)) / 3.0;
      best = std::min(best, cost);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(exact_w1_small(EmpiricalMeasure::uniform(a), EmpiricalMeasure::uniform(b)) ==
          doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("exact W1 agrees with the one-dimensional formula")
{
  Rng rng(17);
  for (int rep = 0; rep < 300; ++rep) {
    const auto p = random_measure(rng, 1, 8);
    const auto q = random_measure(rng, 1, 8);
    CHECK(std::abs(exact_w1_small(p, q) - w1_empirical_1d(p, q)) < 1e-10);
  }
}

TEST_CASE("metric axioms and translation equivariance")
{
  Rng rng(23);
  for (int rep = 0; rep < 200; ++rep) {
    const auto p = random_measure(rng, 1, 8);
    const auto q = random_measure(rng, 1, 8);
    const auto r = random_measure(rng, 1, 8);
    CHECK(w1_empirical_1d(p, q) == w1_empirical_1d(q, p));
    CHECK(w1_empirical_1d(p, r) <= w1_empirical_1d(p, q) + w1_empirical_1d(q, r) + 1e-10);
    auto ps = p, qs = q;
    for (double& x : ps.atoms.data)
      x += 3.7;
    for (double& x : qs.atoms.data)
      x += 3.7;
    CHECK(std::abs(w1_empirical_1d(ps, qs) - w1_empirical_1d(p, q)) < 1e-12);
  }
}

TEST_CASE("equal-size uniform supports use sorted matching")
{
  Rng rng(29);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> x(7), y(7);
    for (auto& v : x)
      v = standard_normal(rng);
    for (auto& v : y)
      v = standard_normal(rng) + 0.5;
    const double got = w1_empirical_1d(EmpiricalMeasure::uniform_1d(x), EmpiricalMeasure::uniform_1d(y));
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    double want = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
      want += std::abs(x[i] - y[i]) / 7.0;
    CHECK(std::abs(got - want) < 1e-12);
  }
}

TEST_CASE("max-sliced W1 never exceeds W1")
{
  Rng rng(31);
  const auto net = build_direction_net(2, 0.01);
  for (int rep = 0; rep < 100; ++rep) {
    const auto p = random_measure(rng, 2, 8);
    const auto q = random_measure(rng, 2, 8);
    CHECK(max_sliced_w1(p, q, net).value <= exact_w1_small(p, q) + 1e-9);
  }
}

TEST_CASE("direction nets")
{
  CHECK(build_direction_net(1, 0.1).directions.size() == 2);
  const auto net2 = build_direction_net(2, 0.01);
  CHECK(net2.directions.size() == 629);
  for (std::size_t k = 0; k < net2.directions.size(); ++k) {
    const auto& v = net2.directions[k];
    CHECK(std::abs(std::hypot(v[0], v[1]) - 1.0) < 1e-12);
    const auto& w = net2.directions[(k + 1) % net2.directions.size()];
    CHECK(std::acos(std::clamp(v[0] * w[0] + v[1] * w[1], -1.0, 1.0)) <= 0.01 + 1e-12);
  }
  const double delta = 0.2;
  const auto net3 = build_direction_net(3, delta);
  Rng rng(37);
  for (int rep = 0; rep < 2000; ++rep) {
    double u[3] = { standard_normal(rng), standard_normal(rng), standard_normal(rng) };
    const double norm = std::sqrt(u[0] * u[0] + u[1] * u[1] + u[2] * u[2]);
    double best = 1e300;
    for (const auto& v : net3.directions) {
      CHECK(std::abs(std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) - 1.0) < 1e-12);
      const double d = std::sqrt(std::pow(u[0] / norm - v[0], 2) + std::pow(u[1] / norm - v[1], 2) +
                                 std::pow(u[2] / norm - v[2], 2));
      best = std::min(best, d);
    }
    CHECK(best <= delta);
  }
}

TEST_CASE("measure validation and csv round trip")
{
  CHECK_THROWS_AS(EmpiricalMeasure::weighted_1d({ 0.0, 1.0 }, { 0.7, 0.7 }), DomainError);
  CHECK_THROWS_AS(EmpiricalMeasure::weighted_1d({ 0.0, 1.0 }, { 1.2, -0.2 }), DomainError);
  Rng rng(41);
  const auto p = random_measure(rng, 2, 8);
  const auto path = std::filesystem::temp_directory_path() / "wdeconv_measure.csv";
  write_measure_csv(path.string(), p);
  const auto q = read_measure_csv(path.string());
  CHECK(q.atoms.data == p.atoms.data);
  CHECK(q.weights == p.weights);
  std::filesystem::remove(path);
}
