#include "wdeconv/bayes_dpm.hpp"
#include "wdeconv/errors.hpp"
#include "wdeconv/noise_models.hpp"
#include "wdeconv/truth.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

namespace wdeconv {

namespace {

constexpr double log_sqrt_2pi = 0.91893853320467274178;

double log_normal(double x, double mean, double sd)
{
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - log_sqrt_2pi;
}

double erfcx(double a)
{
  // exp(a^2) erfc(a) for a >= 0
  if (a < 26.0)
    return std::exp(a * a) * std::erfc(a);
  const double i2 = 1.0 / (a * a);
  const double series = 1.0 - 0.5 * i2 + 0.75 * i2 * i2 - 1.875 * i2 * i2 * i2 +
                        6.5625 * i2 * i2 * i2 * i2;
  return series / (a * std::sqrt(std::numbers::pi));
}

// e^{sigma^2/2 - z} erfc((sigma^2 - z) / (sigma sqrt 2)) without overflow
double laplace_gauss_term(double z, double sigma)
{
  const double a = (sigma * sigma - z) / (sigma * std::numbers::sqrt2);
  if (a >= 0.0)
    return std::exp(-z * z / (2.0 * sigma * sigma)) * erfcx(a);
  return std::exp(0.5 * sigma * sigma - z) * std::erfc(a);
}

int pick_log_weights(const std::vector<double>& logw, Rng& rng)
{
  const double mx = *std::max_element(logw.begin(), logw.end());
  double total = 0.0;
  std::vector<double> w(logw.size());
  for (std::size_t k = 0; k < logw.size(); ++k) {
    w[k] = std::isfinite(logw[k]) ? std::exp(logw[k] - mx) : 0.0;
    total += w[k];
  }
  double u = uniform01(rng) * total;
  for (std::size_t k = 0; k < w.size(); ++k) {
    u -= w[k];
    if (u <= 0.0 && w[k] > 0.0)
      return static_cast<int>(k);
  }
  for (std::size_t k = w.size(); k-- > 0;)
    if (w[k] > 0.0)
      return static_cast<int>(k);
  return 0;
}

// Drops empty clusters and renumbers the rest in order of first appearance.
void compact(DPMState& s)
{
  std::vector<int> map(s.locations.size(), -1);
  std::vector<double> locs;
  std::vector<int> counts;
  for (auto& c : s.assignments) {
    if (map[c] < 0) {
      map[c] = static_cast<int>(locs.size());
      locs.push_back(s.locations[c]);
      counts.push_back(0);
    }
    c = map[c];
    ++counts[c];
  }
  s.locations = std::move(locs);
  s.counts = std::move(counts);
}

double sigma_log_target(double sigma, const DPMState& s, const DPMPrior& prior)
{
  double lp = prior.sigma.log_density(sigma);
  for (std::size_t i = 0; i < s.latent_x.size(); ++i)
    lp += log_normal(s.latent_x[i], s.locations[s.assignments[i]], sigma);
  return lp;
}

// log p(latent X | assignments, sigma) with each location N(0, tau2) integrated out
double collapsed_loglik(const std::vector<double>& sum,
                        const std::vector<double>& sumsq,
                        const std::vector<int>& counts,
                        double sigma,
                        double tau2)
{
  const double s2 = sigma * sigma;
  double lp = 0.0;
  for (std::size_t k = 0; k < counts.size(); ++k) {
    const double nk = counts[k];
    const double xbar = sum[k] / nk;
    const double ss = std::max(sumsq[k] - nk * xbar * xbar, 0.0);
    const double v = tau2 + s2 / nk;
    lp += -nk * (std::log(sigma) + log_sqrt_2pi) - ss / (2.0 * s2) - 0.5 * std::log(1.0 + nk * tau2 / s2) -
          xbar * xbar / (2.0 * v);
  }
  return lp;
}

// log Phi(a), accurate in the lower tail
double log_ndtr(double a)
{
  if (a > -5.0)
    return std::log(0.5 * std::erfc(-a / std::numbers::sqrt2));
  return std::log(0.5 * erfcx(-a / std::numbers::sqrt2)) - 0.5 * a * a;
}

// Z ~ N(0, 1) conditioned on Z > a
double truncated_normal_above(double a, Rng& rng)
{
  if (a <= 0.0) {
    for (;;) {
      const double z = standard_normal(rng);
      if (z > a)
        return z;
    }
  }
  const double lambda = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double z = a + standard_exponential(rng) / lambda;
    if (std::log(uniform01(rng)) <= -0.5 * (z - lambda) * (z - lambda))
      return z;
  }
}

double slice_sample(double x0, double width, const std::function<double(double)>& logf, Rng& rng)
{
  const double y = logf(x0) + std::log(uniform01(rng));
  double lo = x0 - width * uniform01(rng);
  double hi = lo + width;
  for (int k = 0; k < 50 && logf(lo) > y; ++k)
    lo -= width;
  for (int k = 0; k < 50 && logf(hi) > y; ++k)
    hi += width;
  for (int k = 0; k < 200; ++k) {
    const double x = lo + (hi - lo) * uniform01(rng);
    if (logf(x) > y)
      return x;
    if (x < x0)
      lo = x;
    else
      hi = x;
  }
  return x0;
}

} // namespace

double SigmaPrior::log_density(double sigma) const
{
  if (!(sigma > 0.0))
    return -std::numeric_limits<double>::infinity();
  if (sigma <= 1.0)
    return -2.0 * std::log(sigma) - zeta / sigma;
  // log A = -zeta + (1/zeta)^nu
  return -zeta + std::pow(1.0 / zeta, nu) + (nu - 1.0) * std::log(sigma) -
         std::pow(sigma / zeta, nu);
}

namespace {

struct SigmaMasses
{
  double lower, upper, A;
};

SigmaMasses sigma_masses(const SigmaPrior& p)
{
  SigmaMasses m;
  m.lower = std::exp(-p.zeta) / p.zeta;
  m.A = std::exp(-p.zeta + std::pow(1.0 / p.zeta, p.nu));
  m.upper = std::exp(-p.zeta) * std::pow(p.zeta, p.nu) / p.nu;
  return m;
}

} // namespace

double SigmaPrior::cdf(double sigma) const
{
  if (!(sigma > 0.0))
    return 0.0;
  const SigmaMasses m = sigma_masses(*this);
  const double total = m.lower + m.upper;
  if (sigma <= 1.0)
    return std::exp(-zeta / sigma) / zeta / total;
  const double tail = m.A * std::pow(zeta, nu) / nu *
                      (std::exp(-std::pow(1.0 / zeta, nu)) - std::exp(-std::pow(sigma / zeta, nu)));
  return (m.lower + tail) / total;
}

double SigmaPrior::quantile(double u) const
{
  if (!(u > 0.0 && u < 1.0))
    throw DomainError("sigma prior quantile needs u in (0, 1)");
  const SigmaMasses m = sigma_masses(*this);
  const double target = u * (m.lower + m.upper);
  if (target <= m.lower)
    return -zeta / std::log(zeta * target);
  const double e = std::exp(-std::pow(1.0 / zeta, nu)) - (target - m.lower) * nu / (m.A * std::pow(zeta, nu));
  if (!(e > 0.0))
    return std::numeric_limits<double>::max();
  return zeta * std::pow(-std::log(e), 1.0 / nu);
}

double DPMPrior::sample_base(Rng& rng) const
{
  if (iota == 2)
    return std::sqrt(1.0 / (2.0 * b0)) * standard_normal(rng);
  return (standard_exponential(rng) - standard_exponential(rng)) / b0;
}

void validate(const DPMPrior& p)
{
  if (!(p.dp_mass > 0.0) || !(p.b0 > 0.0) || !(p.sigma.zeta > 0.0) || !(p.sigma.nu > 0.0))
    throw DomainError("prior parameters must be positive");
  if (p.iota != 1 && p.iota != 2)
    throw DomainError("iota must be 1 or 2");
  if (p.aux_clusters < 1)
    throw DomainError("need at least one auxiliary cluster");
  if (!(p.sigma_step > 0.0) || !(p.marginal_step > 0.0))
    throw DomainError("sigma step must be positive");
  if (p.coarse_clusters < 1)
    throw DomainError("coarse init needs at least one cluster");
}

DPMPrior dpm_prior_from_json(const nlohmann::json& j)
{
  DPMPrior p;
  try {
    p.dp_mass = j.value("dp_mass", p.dp_mass);
    p.iota = j.value("iota", p.iota);
    p.b0 = j.value("b0", p.b0);
    if (j.contains("sigma_prior")) {
      p.sigma.zeta = j["sigma_prior"].value("zeta", p.sigma.zeta);
      p.sigma.nu = j["sigma_prior"].value("nu", p.sigma.nu);
    }
    p.aux_clusters = j.value("aux_clusters", p.aux_clusters);
    p.sigma_step = j.value("sigma_step", p.sigma_step);
    p.marginal_step = j.value("marginal_step", p.marginal_step);
    p.coarse_clusters = j.value("coarse_clusters", p.coarse_clusters);
    const std::string init = j.value("init", std::string("coarse"));
    if (init == "per-observation")
      p.init = InitMode::PerObservation;
    else if (init == "coarse")
      p.init = InitMode::Coarse;
    else
      throw ConfigError("unknown init mode '" + init + "'");
    validate(p);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad prior: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return p;
}

nlohmann::json to_json(const DPMPrior& p)
{
  return { { "dp_mass", p.dp_mass },
           { "iota", p.iota },
           { "b0", p.b0 },
           { "sigma_prior", { { "zeta", p.sigma.zeta }, { "nu", p.sigma.nu } } },
           { "aux_clusters", p.aux_clusters },
           { "sigma_step", p.sigma_step },
           { "marginal_step", p.marginal_step },
           { "coarse_clusters", p.coarse_clusters },
           { "init", p.init == InitMode::PerObservation ? "per-observation" : "coarse" } };
}

void check_state(const DPMState& s, std::size_t n)
{
  if (s.assignments.size() != n || s.latent_x.size() != n || s.latent_w.size() != n)
    throw DomainError("state vectors must have one entry per observation");
  if (s.counts.size() != s.locations.size())
    throw DomainError("one count per cluster required");
  std::vector<int> tally(s.locations.size(), 0);
  for (int c : s.assignments) {
    if (c < 0 || static_cast<std::size_t>(c) >= s.locations.size())
      throw DomainError("assignment points to a missing cluster");
    ++tally[c];
  }
  for (std::size_t k = 0; k < tally.size(); ++k)
    if (tally[k] == 0 || tally[k] != s.counts[k])
      throw DomainError("cluster counts are inconsistent or a cluster is empty");
  for (double w : s.latent_w)
    if (!(w > 0.0))
      throw DomainError("latent scales must be positive");
  if (!(s.sigma > 0.0))
    throw DomainError("sigma must be positive");
}

double sample_inverse_gaussian(double mean, double shape, Rng& rng)
{
  const double nu = standard_normal(rng);
  const double a = mean * nu * nu / (2.0 * shape);
  // mean (1 + a - sqrt(a^2 + 2a)) written without cancellation
  const double x = mean / (1.0 + a + std::sqrt(a * a + 2.0 * a));
  if (uniform01(rng) <= mean / (mean + x))
    return x;
  return mean * mean / x;
}

double sample_latent_x_marginal(double y, double mu, double sigma, Rng& rng)
{
  const double s2 = sigma * sigma;
  const double left_mean = mu + s2;
  const double right_mean = mu - s2;
  const double log_left = mu - y + 0.5 * s2 + log_ndtr((y - left_mean) / sigma);
  const double log_right = y - mu + 0.5 * s2 + log_ndtr((right_mean - y) / sigma);
  const double p_left = 1.0 / (1.0 + std::exp(log_right - log_left));
  if (uniform01(rng) < p_left)
    return left_mean - sigma * truncated_normal_above((left_mean - y) / sigma, rng);
  return right_mean + sigma * truncated_normal_above((y - right_mean) / sigma, rng);
}

double sample_latent_x(double y, double w, double mu, double sigma, Rng& rng)
{
  const double prec = 1.0 / (2.0 * w) + 1.0 / (sigma * sigma);
  const double mean = (y / (2.0 * w) + mu / (sigma * sigma)) / prec;
  return mean + standard_normal(rng) / std::sqrt(prec);
}

double sample_latent_w(double u, Rng& rng)
{
  // 1/W is inverse Gaussian with mean 2/|u| and shape 2
  const double a = std::abs(u);
  if (a < 1e-300)
    return sample_gamma(0.5, rng);
  return 1.0 / sample_inverse_gaussian(2.0 / a, 2.0, rng);
}

DPMState init_state(const std::vector<double>& Y, const DPMPrior& prior, Rng& rng)
{
  validate(prior);
  if (Y.empty())
    throw DomainError("need at least one observation");
  (void)rng;
  const std::size_t n = Y.size();
  DPMState s;
  s.latent_x = Y;
  s.latent_w.assign(n, 1.0);
  s.sigma = prior.sigma.median();
  s.assignments.resize(n);
  if (prior.init == InitMode::PerObservation) {
    for (std::size_t i = 0; i < n; ++i) {
      s.assignments[i] = static_cast<int>(i);
      s.locations.push_back(Y[i]);
      s.counts.push_back(1);
    }
  } else {
    // a few Lloyd iterations from quantile seeds
    std::vector<double> sorted(Y);
    std::sort(sorted.begin(), sorted.end());
    const std::size_t k = std::min<std::size_t>(prior.coarse_clusters, n);
    std::vector<double> centers(k);
    for (std::size_t j = 0; j < k; ++j)
      centers[j] = sorted[(2 * j + 1) * n / (2 * k)];
    for (int iter = 0; iter < 20; ++iter) {
      std::vector<double> sum(k, 0.0);
      std::vector<int> count(k, 0);
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < k; ++j)
          if (std::abs(Y[i] - centers[j]) < std::abs(Y[i] - centers[best]))
            best = j;
        s.assignments[i] = static_cast<int>(best);
        sum[best] += Y[i];
        ++count[best];
      }
      for (std::size_t j = 0; j < k; ++j)
        if (count[j] > 0)
          centers[j] = sum[j] / count[j];
    }
    s.locations = centers;
    s.counts.assign(k, 0);
    for (int c : s.assignments)
      ++s.counts[c];
    compact(s);
  }
  s.loglik = marginal_loglik(s, Y);
  return s;
}

double laplace_gauss_density(double z, double sigma)
{
  return 0.25 * (laplace_gauss_term(z, sigma) + laplace_gauss_term(-z, sigma));
}

double marginal_loglik(const DPMState& s, const std::vector<double>& Y)
{
  double ll = 0.0;
  for (std::size_t i = 0; i < Y.size(); ++i)
    ll += std::log(laplace_gauss_density(Y[i] - s.locations[s.assignments[i]], s.sigma));
  return ll;
}

namespace {

struct SigmaSteps
{
  double collapsed;
  double marginal;
};

DPMState sweep_once(const DPMState& in,
                    const std::vector<double>& Y,
                    const DPMPrior& prior,
                    SigmaSteps steps,
                    Rng& rng,
                    bool& sigma_accepted,
                    bool& marginal_accepted)
{
  DPMState s = in;
  const std::size_t n = Y.size();

  // (i) sigma given the partition and locations with X and W integrated out,
  // then X and W redrawn from their joint conditional
  {
    const auto marginal_target = [&](double sg) {
      double lp = prior.sigma.log_density(sg);
      for (std::size_t i = 0; i < n; ++i)
        lp += std::log(laplace_gauss_density(Y[i] - s.locations[s.assignments[i]], sg));
      return lp;
    };
    const double proposal = s.sigma * std::exp(steps.marginal * standard_normal(rng));
    const double log_ratio = marginal_target(proposal) - marginal_target(s.sigma) + std::log(proposal / s.sigma);
    marginal_accepted = std::log(uniform01(rng)) < log_ratio;
    if (marginal_accepted)
      s.sigma = proposal;
  }
  for (std::size_t i = 0; i < n; ++i)
    s.latent_x[i] = sample_latent_x_marginal(Y[i], s.locations[s.assignments[i]], s.sigma, rng);

  // (ii) W | Y, X
  for (std::size_t i = 0; i < n; ++i)
    s.latent_w[i] = sample_latent_w(Y[i] - s.latent_x[i], rng);
  const double sig = s.sigma;

  // (iii) assignments with auxiliary clusters
  const int m = prior.aux_clusters;
  std::vector<double> aux(m), logw;
  for (std::size_t i = 0; i < n; ++i) {
    const int c = s.assignments[i];
    --s.counts[c];
    const bool singleton = s.counts[c] == 0;
    for (int a = 0; a < m; ++a)
      aux[a] = (a == 0 && singleton) ? s.locations[c] : prior.sample_base(rng);
    const std::size_t K = s.locations.size();
    logw.assign(K + m, -std::numeric_limits<double>::infinity());
    for (std::size_t k = 0; k < K; ++k)
      if (s.counts[k] > 0)
        logw[k] = std::log(static_cast<double>(s.counts[k])) + log_normal(s.latent_x[i], s.locations[k], sig);
    const double log_share = std::log(prior.dp_mass / m);
    for (int a = 0; a < m; ++a)
      logw[K + a] = log_share + log_normal(s.latent_x[i], aux[a], sig);
    const int pick = pick_log_weights(logw, rng);
    if (static_cast<std::size_t>(pick) < K) {
      s.assignments[i] = pick;
      ++s.counts[pick];
    } else {
      const double loc = aux[pick - K];
      if (singleton) {
        s.locations[c] = loc;
        s.assignments[i] = c;
        s.counts[c] = 1;
      } else {
        // reuse an empty slot when one exists
        std::size_t slot = K;
        for (std::size_t k = 0; k < K; ++k)
          if (s.counts[k] == 0) {
            slot = k;
            break;
          }
        if (slot == K) {
          s.locations.push_back(loc);
          s.counts.push_back(0);
        } else {
          s.locations[slot] = loc;
        }
        s.assignments[i] = static_cast<int>(slot);
        s.counts[slot] = 1;
      }
    }
  }
  compact(s);

  const std::size_t K = s.locations.size();
  std::vector<double> sum(K, 0.0), sumsq(K, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    sum[s.assignments[i]] += s.latent_x[i];
    sumsq[s.assignments[i]] += s.latent_x[i] * s.latent_x[i];
  }

  // (iv) sigma by random-walk Metropolis on log sigma; with the Gaussian base
  // the locations are integrated out, which lets sigma and the clusters move
  // together
  const auto target = [&](double sg) {
    if (prior.iota == 2)
      return prior.sigma.log_density(sg) + collapsed_loglik(sum, sumsq, s.counts, sg, 1.0 / (2.0 * prior.b0));
    return sigma_log_target(sg, s, prior);
  };
  const double proposal = s.sigma * std::exp(steps.collapsed * standard_normal(rng));
  const double log_ratio = target(proposal) - target(s.sigma) + std::log(proposal / s.sigma);
  sigma_accepted = std::log(uniform01(rng)) < log_ratio;
  if (sigma_accepted)
    s.sigma = proposal;

  // (v) locations given sigma
  const double sg = s.sigma;
  for (std::size_t k = 0; k < K; ++k) {
    const double nk = s.counts[k];
    const double xbar = sum[k] / nk;
    if (prior.iota == 2) {
      const double prec = 2.0 * prior.b0 + nk / (sg * sg);
      const double mean = (sum[k] / (sg * sg)) / prec;
      s.locations[k] = mean + standard_normal(rng) / std::sqrt(prec);
    } else {
      const auto logf = [&](double mu) {
        return -prior.b0 * std::abs(mu) - nk * (mu - xbar) * (mu - xbar) / (2.0 * sg * sg);
      };
      s.locations[k] = slice_sample(s.locations[k], 2.0 * sg / std::sqrt(nk), logf, rng);
    }
  }

  s.loglik = marginal_loglik(s, Y);
  return s;
}

} // namespace

DPMState gibbs_sweep(const DPMState& state,
                     const std::vector<double>& Y,
                     const DPMPrior& prior,
                     Rng& rng,
                     SweepStats* stats)
{
  SigmaSteps steps{ prior.sigma_step, prior.marginal_step };
  for (int attempt = 0; attempt < 4; ++attempt) {
    bool accepted = false, marginal = false;
    DPMState next = sweep_once(state, Y, prior, steps, rng, accepted, marginal);
    if (std::isfinite(next.loglik)) {
      if (stats) {
        stats->sigma_accepted = accepted;
        stats->marginal_accepted = marginal;
        stats->retries = attempt;
      }
      return next;
    }
    steps.collapsed *= 0.5;
    steps.marginal *= 0.5;
  }
  throw NumericalUnderflow("log-likelihood stayed non-finite after tempered retries");
}

ChainSummary run_chain(const std::vector<double>& Y,
                       const DPMPrior& prior,
                       std::size_t iters,
                       std::size_t burnin,
                       std::size_t thin,
                       std::uint64_t seed)
{
  if (!(iters > burnin))
    throw DomainError("iters must exceed burnin");
  if (thin == 0)
    throw DomainError("thin must be positive");
  Rng rng(seed);
  ChainSummary out;
  DPMPrior tuned = prior;
  DPMState s = init_state(Y, tuned, rng);
  std::size_t accepted = 0, window = 0, marginal_window = 0;
  for (std::size_t it = 1; it <= iters; ++it) {
    SweepStats st;
    s = gibbs_sweep(s, Y, tuned, rng, &st);
    accepted += st.sigma_accepted ? 1 : 0;
    window += st.sigma_accepted ? 1 : 0;
    marginal_window += st.marginal_accepted ? 1 : 0;
    // tune both sigma steps toward 30% acceptance during burn-in only
    if (it <= burnin && it % 50 == 0) {
      tuned.sigma_step *= std::exp(static_cast<double>(window) / 50.0 - 0.3);
      tuned.marginal_step *= std::exp(static_cast<double>(marginal_window) / 50.0 - 0.3);
      window = marginal_window = 0;
    }
    out.retries += st.retries;
    out.trace_loglik.push_back(s.loglik);
    out.trace_sigma.push_back(s.sigma);
    out.trace_clusters.push_back(static_cast<int>(s.clusters()));
    if (it > burnin && (it - burnin - 1) % thin == 0)
      out.kept.push_back(s);
  }
  out.sigma_acceptance = static_cast<double>(accepted) / static_cast<double>(iters);
  return out;
}

MixingSummary posterior_mean_mixing(const ChainSummary& chain, const GridSpec& grid)
{
  if (chain.kept.empty())
    throw EmptyChain("no kept states");
  MixingSummary out{ GridFunction1D(grid, GridKind::density), GridFunction1D(grid, GridKind::cdf) };
  const double inv_states = 1.0 / static_cast<double>(chain.kept.size());
  for (const auto& s : chain.kept) {
    const double n = static_cast<double>(s.assignments.size());
    for (std::size_t k = 0; k < s.locations.size(); ++k) {
      const double w = inv_states * s.counts[k] / n;
      for (std::size_t i = 0; i < grid.length; ++i) {
        const double z = (grid.x(i) - s.locations[k]) / s.sigma;
        out.density.values[i] += w * normal_pdf(z) / s.sigma;
        out.cdf.values[i] += w * normal_cdf(z);
      }
    }
  }
  return out;
}

GridFunction1D posterior_predictive_density(const ChainSummary& chain, const GridSpec& grid)
{
  if (chain.kept.empty())
    throw EmptyChain("no kept states");
  GridFunction1D out(grid, GridKind::density);
  const double inv_states = 1.0 / static_cast<double>(chain.kept.size());
  for (const auto& s : chain.kept) {
    const double n = static_cast<double>(s.assignments.size());
    for (std::size_t k = 0; k < s.locations.size(); ++k) {
      const double w = inv_states * s.counts[k] / n;
      for (std::size_t i = 0; i < grid.length; ++i)
        out.values[i] += w * laplace_gauss_density(grid.x(i) - s.locations[k], s.sigma);
    }
  }
  return out;
}

PriorDraw sample_prior(std::size_t n, const DPMPrior& prior, Rng& rng)
{
  validate(prior);
  PriorDraw d;
  DPMState& s = d.state;
  s.sigma = prior.sigma.sample(rng);
  s.assignments.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = uniform01(rng) * (static_cast<double>(i) + prior.dp_mass);
    double acc = 0.0;
    int pick = -1;
    for (std::size_t k = 0; k < s.counts.size(); ++k) {
      acc += s.counts[k];
      if (u < acc) {
        pick = static_cast<int>(k);
        break;
      }
    }
    if (pick < 0) {
      pick = static_cast<int>(s.locations.size());
      s.locations.push_back(prior.sample_base(rng));
      s.counts.push_back(0);
    }
    s.assignments[i] = pick;
    ++s.counts[pick];
  }
  s.latent_x.resize(n);
  s.latent_w.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.latent_x[i] = s.locations[s.assignments[i]] + s.sigma * standard_normal(rng);
    s.latent_w[i] = standard_exponential(rng);
  }
  d.Y = sample_data_given_state(s, rng);
  s.loglik = marginal_loglik(s, d.Y);
  return d;
}

std::vector<double> sample_data_given_state(const DPMState& s, Rng& rng)
{
  std::vector<double> Y(s.latent_x.size());
  for (std::size_t i = 0; i < Y.size(); ++i)
    Y[i] = s.latent_x[i] + std::sqrt(2.0 * s.latent_w[i]) * standard_normal(rng);
  return Y;
}

namespace {

std::vector<double> geweke_stats(const DPMState& s, const std::vector<double>& Y)
{
  const double n = static_cast<double>(Y.size());
  double y1 = 0.0, y2 = 0.0, w = 0.0;
  for (std::size_t i = 0; i < Y.size(); ++i) {
    y1 += Y[i];
    y2 += Y[i] * Y[i];
    w += s.latent_w[i];
  }
  return { y1 / n, y2 / n, s.sigma, static_cast<double>(s.clusters()), w / n };
}

double mean_of(const std::vector<double>& v)
{
  double m = 0.0;
  for (double x : v)
    m += x;
  return m / static_cast<double>(v.size());
}

double iid_se(const std::vector<double>& v)
{
  const double m = mean_of(v);
  double var = 0.0;
  for (double x : v)
    var += (x - m) * (x - m);
  var /= static_cast<double>(v.size() - 1);
  return std::sqrt(var / static_cast<double>(v.size()));
}

// Initial monotone sequence estimate of the standard error of a chain mean.
double chain_se(const std::vector<double>& v)
{
  const std::size_t n = v.size();
  const double m = mean_of(v);
  const auto acov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t i = 0; i + lag < n; ++i)
      s += (v[i] - m) * (v[i + lag] - m);
    return s / static_cast<double>(n);
  };
  double var = -acov(0);
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; 2 * k + 1 < n / 2; ++k) {
    double pair = acov(2 * k) + acov(2 * k + 1);
    if (pair <= 0.0)
      break;
    pair = std::min(pair, prev);
    prev = pair;
    var += 2.0 * pair;
  }
  return std::sqrt(std::max(var, 0.0) / static_cast<double>(n));
}

} // namespace

GewekeReport geweke_test(std::size_t n, std::size_t sweeps, const DPMPrior& prior, std::uint64_t seed, double band)
{
  return geweke_test(n, sweeps, prior, seed, band, [&prior](const DPMState& s, const std::vector<double>& Y, Rng& rng) {
    return gibbs_sweep(s, Y, prior, rng);
  });
}

GewekeReport geweke_test(std::size_t n,
                         std::size_t sweeps,
                         const DPMPrior& prior,
                         std::uint64_t seed,
                         double band,
                         const Transition& transition)
{
  if (n == 0 || sweeps < 1000)
    throw DomainError("Geweke test needs n >= 1 and at least 1000 sweeps");
  const char* names[] = { "mean_y", "mean_y2", "sigma", "clusters", "mean_w" };
  constexpr std::size_t k = 5;
  std::vector<std::vector<double>> indep(k), chain(k);

  Rng rng_a(derive_seed(seed, 0, 0));
  for (std::size_t it = 0; it < sweeps; ++it) {
    const PriorDraw d = sample_prior(n, prior, rng_a);
    const auto g = geweke_stats(d.state, d.Y);
    for (std::size_t j = 0; j < k; ++j)
      indep[j].push_back(g[j]);
  }

  Rng rng_b(derive_seed(seed, 1, 0));
  PriorDraw d = sample_prior(n, prior, rng_b);
  DPMState s = d.state;
  std::vector<double> Y = d.Y;
  for (std::size_t it = 0; it < sweeps; ++it) {
    s = transition(s, Y, rng_b);
    Y = sample_data_given_state(s, rng_b);
    s.loglik = marginal_loglik(s, Y);
    const auto g = geweke_stats(s, Y);
    for (std::size_t j = 0; j < k; ++j)
      chain[j].push_back(g[j]);
  }

  GewekeReport rep;
  rep.band = band;
  rep.pass = true;
  for (std::size_t j = 0; j < k; ++j) {
    GewekeStat st;
    st.name = names[j];
    st.prior_mean = mean_of(indep[j]);
    st.prior_se = iid_se(indep[j]);
    st.chain_mean = mean_of(chain[j]);
    st.chain_se = chain_se(chain[j]);
    const double se = std::sqrt(st.prior_se * st.prior_se + st.chain_se * st.chain_se);
    st.z = se > 0.0 ? (st.chain_mean - st.prior_mean) / se : 0.0;
    rep.pass = rep.pass && std::abs(st.z) <= band;
    rep.stats.push_back(st);
  }
  return rep;
}

} // namespace wdeconv
