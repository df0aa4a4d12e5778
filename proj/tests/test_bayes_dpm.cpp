#include "wdeconv/bayes_dpm.hpp"
#include "wdeconv/errors.hpp"
#include "wdeconv/noise_models.hpp"
#include "wdeconv/truth.hpp"
#include "wdeconv/wasserstein.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace wdeconv;

namespace {

template <class F>
double integrate(F f, double lo, double hi, int steps = 200000)
{
  const double dx = (hi - lo) / steps;
  double acc = 0.0;
  for (int i = 0; i < steps; ++i)
    acc += f(lo + (i + 0.5) * dx);
  return acc * dx;
}

std::vector<double> noisy_gaussian(std::size_t n, std::uint64_t seed)
{
  Rng rng(seed);
  std::vector<double> Y(n);
  for (double& y : Y)
    y = standard_normal(rng) + sample_one(NoiseModel::laplace(), rng);
  return Y;
}

DPMState two_cluster_state()
{
  DPMState s;
  s.assignments = { 0, 1, 0, 0 };
  s.locations = { -1.0, 2.0 };
  s.counts = { 3, 1 };
  s.sigma = 0.5;
  s.latent_x = { -1.0, 2.0, -0.5, -1.5 };
  s.latent_w = { 1.0, 1.0, 1.0, 1.0 };
  return s;
}

} // namespace

TEST_CASE("sigma prior")
{
  const SigmaPrior p;
  CHECK(p.cdf(0.0) == 0.0);
  CHECK(p.cdf(1e6) == doctest::Approx(1.0));
  for (double u : { 0.01, 0.2, 0.5, 0.8, 0.99 })
    CHECK(p.cdf(p.quantile(u)) == doctest::Approx(u).epsilon(1e-9));
  // continuity at 1
  CHECK(p.log_density(1.0 - 1e-9) == doctest::Approx(p.log_density(1.0 + 1e-9)).epsilon(1e-6));
  // cdf agrees with quadrature of the normalised density
  const double z = integrate([&](double s) { return std::exp(p.log_density(s)); }, 1e-6, 40.0);
  const double part = integrate([&](double s) { return std::exp(p.log_density(s)); }, 1e-6, 0.7);
  CHECK(part / z == doctest::Approx(p.cdf(0.7)).epsilon(1e-5));
}

TEST_CASE("conjugate latent X draw")
{
  Rng rng(1);
  const double y = 1.3, w = 0.4, mu = -0.2, sigma = 0.7;
  const double prec = 1.0 / (sigma * sigma) + 1.0 / (2.0 * w);
  const double mean = (mu / (sigma * sigma) + y / (2.0 * w)) / prec;
  double m = 0.0, v = 0.0;
  const int n = 200000;
  std::vector<double> xs(n);
  for (double& x : xs) {
    x = sample_latent_x(y, w, mu, sigma, rng);
    m += x;
  }
  m /= n;
  for (double x : xs)
    v += (x - m) * (x - m);
  v /= n - 1;
  CHECK(std::abs(m - mean) < 0.01);
  CHECK(v == doctest::Approx(1.0 / prec).epsilon(0.02));
}

TEST_CASE("latent X draw with W integrated out matches quadrature")
{
  for (const auto& [y, mu, sigma] : { std::tuple{ 1.0, 0.0, 0.5 }, std::tuple{ -3.0, 1.0, 2.0 }, std::tuple{ 0.0, 0.0, 0.1 } }) {
    auto kern = [&](double x) { return normal_pdf((x - mu) / sigma) * std::exp(-std::abs(y - x)); };
    const double lo = std::min(y, mu) - 12.0 * sigma - 12.0, hi = std::max(y, mu) + 12.0 * sigma + 12.0;
    const double z = integrate(kern, lo, hi);
    const double m1 = integrate([&](double x) { return x * kern(x); }, lo, hi) / z;
    const double m2 = integrate([&](double x) { return x * x * kern(x); }, lo, hi) / z;
    Rng rng(2);
    const int n = 200000;
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = sample_latent_x_marginal(y, mu, sigma, rng);
      s1 += x;
      s2 += x * x;
    }
    const double sd = std::sqrt(m2 - m1 * m1);
    CHECK(std::abs(s1 / n - m1) < 5.0 * sd / std::sqrt(n));
    CHECK(s2 / n == doctest::Approx(m2).epsilon(0.02));
  }
}

TEST_CASE("latent W draw matches quadrature")
{
  for (double u : { 0.0, 1.0, 4.0 }) {
    auto kern = [&](double w) { return std::exp(-u * u / (4.0 * w) - w) / std::sqrt(w); };
    // substitute w = s^2 to remove the singularity at 0
    auto ks = [&](double s) { return 2.0 * s * kern(s * s); };
    const double z = integrate(ks, 1e-9, 8.0);
    const double mean = integrate([&](double s) { return s * s * ks(s); }, 1e-9, 8.0) / z;
    Rng rng(3);
    const int n = 200000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i)
      acc += sample_latent_w(u, rng);
    CHECK(acc / n == doctest::Approx(mean).epsilon(0.01));
  }
}

TEST_CASE("inverse gaussian moments")
{
  Rng rng(4);
  const double mu = 1.5, lambda = 2.0;
  const int n = 200000;
  double s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = sample_inverse_gaussian(mu, lambda, rng);
    s1 += x;
    s2 += x * x;
  }
  const double mean = s1 / n;
  CHECK(mean == doctest::Approx(mu).epsilon(0.01));
  CHECK(s2 / n - mean * mean == doctest::Approx(mu * mu * mu / lambda).epsilon(0.03));
}

TEST_CASE("laplace-gaussian convolution")
{
  for (double sigma : { 0.05, 0.5, 1.0, 3.0 })
    for (double z : { -4.0, -0.3, 0.0, 1.0, 7.0 }) {
      const double q = integrate([&](double u) { return 0.5 * std::exp(-std::abs(u)) * normal_pdf((z - u) / sigma) / sigma; },
                                 z - 12.0 * sigma - 0.01, z + 12.0 * sigma + 0.01);
      CHECK(std::abs(laplace_gauss_density(z, sigma) - q) < 1e-8);
    }
  CHECK(laplace_gauss_density(40.0, 0.5) > 0.0);
}

TEST_CASE("state checks and initialisation")
{
  CHECK_NOTHROW(check_state(two_cluster_state(), 4));
  DPMState bad = two_cluster_state();
  bad.counts = { 2, 2 };
  CHECK_THROWS_AS(check_state(bad, 4), DomainError);
  bad = two_cluster_state();
  bad.assignments[1] = 2;
  CHECK_THROWS_AS(check_state(bad, 4), DomainError);

  DPMPrior prior;
  Rng rng(5);
  const DPMState one = init_state({ 0.3 }, prior, rng);
  CHECK_NOTHROW(check_state(one, 1));
  CHECK(one.clusters() == 1);
  prior.init = InitMode::PerObservation;
  const DPMState each = init_state({ 0.3, 1.0, -2.0 }, prior, rng);
  CHECK(each.clusters() == 3);
  CHECK_NOTHROW(check_state(each, 3));
}

TEST_CASE("prior validation and json round trip")
{
  DPMPrior p;
  p.iota = 3;
  CHECK_THROWS_AS(validate(p), DomainError);
  p = DPMPrior{};
  p.b0 = 0.0;
  CHECK_THROWS_AS(validate(p), DomainError);
  p = DPMPrior{};
  p.b0 = 0.7;
  p.init = InitMode::PerObservation;
  const DPMPrior q = dpm_prior_from_json(to_json(p));
  CHECK(q.b0 == 0.7);
  CHECK(q.init == InitMode::PerObservation);
}

TEST_CASE("sweeps keep the state consistent and are seed deterministic")
{
  const auto Y = noisy_gaussian(50, 6);
  const DPMPrior prior;
  Rng a(7), b(7);
  DPMState s = init_state(Y, prior, a), t = init_state(Y, prior, b);
  for (int it = 0; it < 50; ++it) {
    s = gibbs_sweep(s, Y, prior, a);
    t = gibbs_sweep(t, Y, prior, b);
    CHECK_NOTHROW(check_state(s, Y.size()));
    CHECK(s.sigma > 0.0);
  }
  CHECK(s.assignments == t.assignments);
  CHECK(s.locations == t.locations);
  CHECK(s.sigma == t.sigma);
  CHECK(s.loglik == doctest::Approx(marginal_loglik(s, Y)));
}

TEST_CASE("chain bookkeeping")
{
  const auto Y = noisy_gaussian(40, 8);
  const DPMPrior prior;
  const ChainSummary c = run_chain(Y, prior, 101, 100, 1, 9);
  CHECK(c.kept.size() == 1);
  CHECK(c.trace_sigma.size() == 101);
  const ChainSummary d = run_chain(Y, prior, 400, 100, 10, 9);
  CHECK(d.kept.size() == 30);
  CHECK(d.sigma_acceptance > 0.0);
  CHECK(d.sigma_acceptance < 1.0);
  const ChainSummary e = run_chain(Y, prior, 400, 100, 10, 9);
  CHECK(e.trace_loglik == d.trace_loglik);
}

TEST_CASE("mixing density fixtures")
{
  ChainSummary c;
  DPMState s;
  s.assignments = { 0 };
  s.counts = { 1 };
  s.locations = { 0.0 };
  s.sigma = 1.0;
  c.kept = { s };
  const GridSpec g = GridSpec::centered(10.0, 1024);
  const MixingSummary m = posterior_mean_mixing(c, g);
  double err = 0.0;
  for (std::size_t i = 0; i < m.density.size(); ++i)
    err = std::max(err, std::abs(m.density.values[i] - normal_pdf(m.density.x(i))));
  CHECK(err < 1e-8);
  CHECK(m.cdf.values.back() == doctest::Approx(1.0).epsilon(1e-8));

  // relabelling the clusters leaves the density unchanged
  const DPMState a = two_cluster_state();
  DPMState b = a;
  b.locations = { 2.0, -1.0 };
  b.counts = { 1, 3 };
  for (int& z : b.assignments)
    z = 1 - z;
  ChainSummary ca, cb, both;
  ca.kept = { a };
  cb.kept = { b };
  both.kept = { a, s };
  const auto fa = posterior_mean_mixing(ca, g).density;
  const auto fb = posterior_mean_mixing(cb, g).density;
  const auto fab = posterior_mean_mixing(both, g).density;
  double relabel = 0.0, linear = 0.0;
  for (std::size_t i = 0; i < fa.size(); ++i) {
    relabel = std::max(relabel, std::abs(fa.values[i] - fb.values[i]));
    linear = std::max(linear, std::abs(fab.values[i] - 0.5 * (fa.values[i] + m.density.values[i])));
  }
  CHECK(relabel < 1e-14);
  CHECK(linear < 1e-14);
}

TEST_CASE("posterior predictive density")
{
  ChainSummary c;
  DPMState s = two_cluster_state();
  s.sigma = 1e-4;
  c.kept = { s };
  const GridSpec g = GridSpec::centered(30.0, 4096);
  const GridFunction1D f = posterior_predictive_density(c, g);
  double err = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double x = f.x(i);
    const double want = 0.75 * 0.5 * std::exp(-std::abs(x + 1.0)) + 0.25 * 0.5 * std::exp(-std::abs(x - 2.0));
    err = std::max(err, std::abs(f.values[i] - want));
  }
  CHECK(err < 1e-3);

  c.kept[0].sigma = 0.8;
  CHECK(trapezoid(posterior_predictive_density(c, g)) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("the posterior mean beats the naive estimate")
{
  const auto Y = noisy_gaussian(400, 10);
  const ChainSummary c = run_chain(Y, DPMPrior{}, 600, 200, 10, 11);
  const GridSpec g = GridSpec::centered(20.0, 2048);
  const GridFunction1D truth = Truth1D::gaussian().cdf_on(g);
  const double post = w1_cdf(posterior_mean_mixing(c, g).cdf, truth);
  GridFunction1D naive(g, GridKind::cdf);
  std::vector<double> sorted = Y;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < naive.size(); ++i)
    naive.values[i] =
      static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), naive.x(i)) - sorted.begin()) / sorted.size();
  CHECK(post < w1_cdf(naive, truth));
}

TEST_CASE("prior draws")
{
  DPMPrior prior;
  Rng rng(12);
  for (int rep = 0; rep < 50; ++rep) {
    const PriorDraw d = sample_prior(5, prior, rng);
    CHECK_NOTHROW(check_state(d.state, 5));
    CHECK(d.Y.size() == 5);
  }
}

TEST_CASE("joint distribution test")
{
  DPMPrior prior;
  prior.b0 = 0.5;
  prior.sigma_step = 1.0;
  const GewekeReport ok = geweke_test(4, 10000, prior, 13, 4.0);
  CHECK(ok.stats.size() == 5);
  for (const auto& s : ok.stats)
    INFO(s.name, " z = ", s.z);
  CHECK(ok.pass);

  // a kernel that inflates sigma after every sweep must be detected
  const GewekeReport bad = geweke_test(4, 10000, prior, 13, 4.0, [&](const DPMState& s, const std::vector<double>& Y, Rng& r) {
    DPMState next = gibbs_sweep(s, Y, prior, r);
    next.sigma *= 1.1;
    return next;
  });
  CHECK_FALSE(bad.pass);

  // so must one that targets a different base measure
  DPMPrior wrong = prior;
  wrong.b0 = 2.0;
  const GewekeReport off = geweke_test(4, 10000, prior, 13, 4.0, [&](const DPMState& s, const std::vector<double>& Y, Rng& r) {
    return gibbs_sweep(s, Y, wrong, r);
  });
  CHECK_FALSE(off.pass);
}
