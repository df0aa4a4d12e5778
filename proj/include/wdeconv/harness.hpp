#pragma once

#include "wdeconv/bayes_dpm.hpp"
#include "wdeconv/deconv_kde.hpp"
#include "wdeconv/matrix.hpp"
#include "wdeconv/noise_models.hpp"
#include "wdeconv/stats.hpp"
#include "wdeconv/truth.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace wdeconv {

inline constexpr const char* results_schema = "results.v1:n,rep,seed,w1_risk,l1_density_risk,status";
inline constexpr const char* timings_schema = "timings.v1:n,rep,runtime_ms";

enum class Task
{
  Simulate,
  Estimate,
  BenchmarkRate,
  Posterior,
  VerifyInversion,
  VerifyApprox,
  LowerboundFamily
};

std::string to_string(Task t);
Task task_from_string(const std::string& s);

struct McmcConfig
{
  std::size_t iters = 1500;
  std::size_t burnin = 500;
  std::size_t thin = 10;
};

struct ExperimentConfig
{
  Task task = Task::Simulate;
  nlohmann::json truth = { { "name", "gaussian" } };
  std::string truth_sample_file; // alternative to a named truth
  std::string data_file;         // observed Y for estimate / posterior
  NoiseModel noise = NoiseModel::laplace(1.0);
  std::size_t dim = 1;
  std::size_t n = 1000;
  std::vector<std::size_t> n_ladder;
  std::size_t replications = 1;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  std::string estimator = "kernel"; // kernel | dpm
  DeconvConfig deconv;
  DPMPrior prior;
  McmcConfig mcmc;
  std::size_t threads = 1;
  std::vector<double> slope_band; // optional [lo, hi] for benchmark-rate
  nlohmann::json verify = nlohmann::json::object();
  nlohmann::json source; // the parsed input with overrides applied
};

//! Parses and validates; malformed input raises ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& j);
void validate(const ExperimentConfig& cfg);
DeconvConfig deconv_config_from_json(const nlohmann::json& j);

std::uint64_t fnv1a64(std::string_view data);
//! 16 hex digits of FNV-1a over the compact dump of the config.
std::string config_hash(const nlohmann::json& config);

struct RatePoint
{
  double n = 0.0;
  double risk = 0.0;
};
//! Least squares on (log n, log risk); at least three distinct n.
SlopeFit fit_slope(const std::vector<RatePoint>& points);

//! Per-run seed from the master seed and the (n, rep) position.
std::uint64_t run_seed(std::uint64_t master, std::size_t n_index, std::size_t rep);

struct RunRow
{
  std::size_t n = 0;
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  double w1_risk = 0.0;
  double l1_density_risk = 0.0; // NaN when no density truth is available
  double runtime_ms = 0.0;
  std::string status = "ok";
};

struct ExperimentResult
{
  std::vector<RunRow> rows; // ordered by (n, rep)
  std::vector<RatePoint> medians;
  SlopeFit fit;
  bool fitted = false;
  double reference_slope = 0.0;
};

//! Runs the estimator on every (n, rep) of the ladder with a bounded pool of
//! cfg.threads workers; rows come back in (n, rep) order whatever the thread
//! count.
ExperimentResult benchmark_rate(const ExperimentConfig& cfg);

//! results.csv body; deterministic for a given config.
std::string results_csv(const std::vector<RunRow>& rows);

struct SimulatedData
{
  Matrix X;
  Matrix Y;
};
SimulatedData simulate_data(const ExperimentConfig& cfg, std::size_t n, std::uint64_t seed);

//! Runs cfg.task, writing its outputs under cfg.output_dir. Returns the exit
//! code: 0 on success, 2 when a verification task fails its check.
int run_task(const ExperimentConfig& cfg, std::ostream& log);

//! Runs job(i) for i < count on at most `threads` workers. Results are stored
//! by index so the caller sees them in order.
template <class R>
std::vector<R> ordered_parallel_map(std::size_t count, std::size_t threads, const std::function<R(std::size_t)>& job)
{
  std::vector<R> out(count);
  std::atomic<std::size_t> next{ 0 };
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        out[i] = job(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure)
          failure = std::current_exception();
      }
    }
  };
  const std::size_t pool = std::max<std::size_t>(1, std::min(threads, count));
  if (pool == 1) {
    worker();
    if (failure)
      std::rethrow_exception(failure);
    return out;
  }
  std::vector<std::thread> ts;
  for (std::size_t t = 0; t < pool; ++t)
    ts.emplace_back(worker);
  for (auto& t : ts)
    t.join();
  if (failure)
    std::rethrow_exception(failure);
  return out;
}

} // namespace wdeconv
