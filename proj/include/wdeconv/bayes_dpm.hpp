#pragma once

#include "wdeconv/grid.hpp"
#include "wdeconv/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <functional>
#include <cstdint>
#include <string>
#include <vector>

namespace wdeconv {

//! Prior on the Gaussian kernel scale: proportional to sigma^-2 e^{-zeta/sigma}
//! on (0, 1] and to A sigma^{nu-1} e^{-(sigma/zeta)^nu} on (1, inf), with A
//! making the density continuous at 1.
struct SigmaPrior
{
  double zeta = 0.5;
  double nu = 2.0;

  double log_density(double sigma) const; // unnormalised
  double cdf(double sigma) const;
  double quantile(double u) const;
  double median() const { return quantile(0.5); }
  double sample(Rng& rng) const { return quantile(uniform01(rng)); }
};

enum class InitMode
{
  PerObservation, // one cluster per observation
  Coarse          // k-means on Y with coarse_clusters centres
};

struct DPMPrior
{
  double dp_mass = 1.0;
  int iota = 2;    // base density proportional to exp(-b0 |u|^iota), iota in {1, 2}
  double b0 = 0.1;
  SigmaPrior sigma;
  int aux_clusters = 3;
  double sigma_step = 0.2;    // random-walk scale on log sigma given X
  double marginal_step = 0.1; // same, with X and W integrated out
  InitMode init = InitMode::Coarse;
  int coarse_clusters = 1; // narrow starts can trap sigma in a many-atom mode

  double base_log_density(double u) const { return -b0 * (iota == 2 ? u * u : std::abs(u)); }
  double sample_base(Rng& rng) const;
};

void validate(const DPMPrior& prior);
DPMPrior dpm_prior_from_json(const nlohmann::json& j);
nlohmann::json to_json(const DPMPrior& prior);

struct DPMState
{
  std::vector<int> assignments;     // cluster index per observation
  std::vector<double> locations;    // mu_j, dense ids 0..K-1
  std::vector<int> counts;          // observations per cluster
  double sigma = 1.0;
  std::vector<double> latent_x;
  std::vector<double> latent_w;
  double loglik = 0.0;

  std::size_t clusters() const { return locations.size(); }
};

//! Throws DomainError when assignments, counts and latents are inconsistent.
void check_state(const DPMState& s, std::size_t n);

DPMState init_state(const std::vector<double>& Y, const DPMPrior& prior, Rng& rng);

// Conditional draws of the latent layer Y = X + sqrt(2 W) Z, W ~ Exp(1).
//! X | Y, W, mu, sigma: conjugate normal.
double sample_latent_x(double y, double w, double mu, double sigma, Rng& rng);
//! X | Y, mu, sigma with W integrated out (two truncated normals split at y).
double sample_latent_x_marginal(double y, double mu, double sigma, Rng& rng);
//! W | u = Y - X, density proportional to w^{-1/2} exp(-u^2 / (4w) - w).
double sample_latent_w(double u, Rng& rng);

struct SweepStats
{
  bool sigma_accepted = false;
  bool marginal_accepted = false;
  int retries = 0;
};

//! One full sweep: sigma given the clusters with X and W integrated out,
//! then X and W from their joint conditional, assignments (auxiliary-cluster
//! update), sigma given X (locations integrated out when iota = 2), then the
//! locations given sigma.
DPMState gibbs_sweep(const DPMState& state,
                     const std::vector<double>& Y,
                     const DPMPrior& prior,
                     Rng& rng,
                     SweepStats* stats = nullptr);

//! Laplace(1) convolved with N(0, sigma^2), at z.
double laplace_gauss_density(double z, double sigma);
//! sum_i log of the marginal density of Y_i given its cluster and sigma.
double marginal_loglik(const DPMState& s, const std::vector<double>& Y);

struct ChainSummary
{
  std::vector<DPMState> kept;
  std::vector<double> trace_loglik;
  std::vector<double> trace_sigma;
  std::vector<int> trace_clusters;
  double sigma_acceptance = 0.0;
  int retries = 0;
};

//! Runs `iters` sweeps and keeps every `thin`-th state after `burnin`. The
//! sigma step is tuned toward 30% acceptance during burn-in and frozen after.
ChainSummary run_chain(const std::vector<double>& Y,
                       const DPMPrior& prior,
                       std::size_t iters,
                       std::size_t burnin,
                       std::size_t thin,
                       std::uint64_t seed);

struct MixingSummary
{
  GridFunction1D density;
  GridFunction1D cdf;
};

//! Average over kept states of sum_j (n_j / n) phi_sigma(x - mu_j).
MixingSummary posterior_mean_mixing(const ChainSummary& chain, const GridSpec& grid);
//! Average over kept states of sum_j (n_j / n) (Laplace * phi_sigma)(x - mu_j).
GridFunction1D posterior_predictive_density(const ChainSummary& chain, const GridSpec& grid);

//! Joint draw from the prior: partition, locations, sigma, latents and data.
struct PriorDraw
{
  DPMState state;
  std::vector<double> Y;
};
PriorDraw sample_prior(std::size_t n, const DPMPrior& prior, Rng& rng);
//! Y_i ~ N(X_i, 2 W_i), the exact conditional of the data given the state.
std::vector<double> sample_data_given_state(const DPMState& s, Rng& rng);

//! Joint-distribution check of the sampler: statistics of (state, Y) from
//! independent prior draws against the chain that alternates a sweep with a
//! fresh Y given the state. Statistics: mean Y, mean Y^2, sigma, cluster count
//! and mean W; the chain side uses initial-monotone-sequence standard errors.
struct GewekeStat
{
  std::string name;
  double prior_mean = 0.0;
  double prior_se = 0.0;
  double chain_mean = 0.0;
  double chain_se = 0.0;
  double z = 0.0;
};

struct GewekeReport
{
  std::vector<GewekeStat> stats;
  double band = 4.0;
  bool pass = false;
};

GewekeReport geweke_test(std::size_t n,
                         std::size_t sweeps,
                         const DPMPrior& prior,
                         std::uint64_t seed,
                         double band = 4.0);

//! Transition kernel under test; the default is gibbs_sweep with the prior.
using Transition = std::function<DPMState(const DPMState&, const std::vector<double>&, Rng&)>;
GewekeReport geweke_test(std::size_t n,
                         std::size_t sweeps,
                         const DPMPrior& prior,
                         std::uint64_t seed,
                         double band,
                         const Transition& transition);

//! Inverse Gaussian variate with the given mean and shape.
double sample_inverse_gaussian(double mean, double shape, Rng& rng);

} // namespace wdeconv
