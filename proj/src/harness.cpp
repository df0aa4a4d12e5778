#include "wdeconv/harness.hpp"
#include "wdeconv/approx_theory.hpp"
#include "wdeconv/csv.hpp"
#include "wdeconv/errors.hpp"
#include "wdeconv/lower_bounds.hpp"
#include "wdeconv/svg_plot.hpp"
#include "wdeconv/wasserstein.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <set>
#include <sstream>

namespace wdeconv {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const char* const library_version = "0.1.0";

struct TaskName
{
  Task task;
  const char* name;
};

constexpr TaskName task_names[] = {
  { Task::Simulate, "simulate" },
  { Task::Estimate, "estimate" },
  { Task::BenchmarkRate, "benchmark-rate" },
  { Task::Posterior, "posterior" },
  { Task::VerifyInversion, "verify-inversion" },
  { Task::VerifyApprox, "verify-approx" },
  { Task::LowerboundFamily, "lowerbound-family" },
};

BandwidthRule rule_from_string(const std::string& s)
{
  if (s == "auto")
    return BandwidthRule::Auto;
  if (s == "plain")
    return BandwidthRule::Plain;
  if (s == "logged")
    return BandwidthRule::Logged;
  if (s == "fixed")
    return BandwidthRule::Fixed;
  throw ConfigError("unknown bandwidth rule '" + s + "'");
}

std::string rule_to_string(BandwidthRule r)
{
  switch (r) {
    case BandwidthRule::Auto: return "auto";
    case BandwidthRule::Plain: return "plain";
    case BandwidthRule::Logged: return "logged";
    case BandwidthRule::Fixed: return "fixed";
  }
  return "auto";
}

GridSpec grid_from_json(const json& j, GridSpec fallback)
{
  if (j.is_null())
    return fallback;
  return GridSpec::centered(j.value("half_width", -fallback.origin), j.value("length", fallback.length));
}

std::string fmt(double v)
{
  if (std::isnan(v))
    return "NA";
  return csv::format_double(v);
}

void ensure_dir(const std::string& dir)
{
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    throw IoError("cannot create output directory " + dir + ": " + ec.message());
}

void write_text(const fs::path& path, const std::string& text)
{
  std::ofstream f(path, std::ios::binary);
  if (!f)
    throw IoError("cannot write " + path.string());
  f << text;
  if (!f)
    throw IoError("write failed for " + path.string());
}

void write_json(const fs::path& path, const json& j)
{
  write_text(path, j.dump(2) + "\n");
}

std::string utc_timestamp()
{
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream o;
  o << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return o.str();
}

void write_manifest(const ExperimentConfig& cfg, const std::vector<std::string>& files)
{
  json m;
  m["task"] = to_string(cfg.task);
  m["config_hash"] = config_hash(cfg.source);
  m["config"] = cfg.source;
  m["seed"] = cfg.seed;
  m["versions"] = { { "wdeconv", library_version }, { "compiler", __VERSION__ }, { "cxx", __cplusplus } };
  m["csv_schemas"] = { { "results", results_schema }, { "timings", timings_schema } };
  m["files"] = files;
  m["created_utc"] = utc_timestamp();
  write_json(fs::path(cfg.output_dir) / "manifest.json", m);
}

Matrix read_matrix_csv(const std::string& path)
{
  const csv::Table t = csv::read(path);
  if (t.header.empty() || t.rows.empty())
    throw IoError("no data in " + path);
  Matrix m(t.rows.size(), t.header.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i)
    for (std::size_t j = 0; j < t.header.size(); ++j)
      m(i, j) = t.rows[i][j];
  return m;
}

void write_matrix_csv(const fs::path& path, const Matrix& m, const std::string& prefix)
{
  csv::Table t;
  for (std::size_t j = 0; j < m.cols; ++j)
    t.header.push_back(prefix + std::to_string(j + 1));
  for (std::size_t i = 0; i < m.rows; ++i) {
    std::vector<double> row(m.cols);
    for (std::size_t j = 0; j < m.cols; ++j)
      row[j] = m(i, j);
    t.rows.push_back(std::move(row));
  }
  csv::write(path.string(), t);
}

bool named_truth(const ExperimentConfig& cfg)
{
  return cfg.truth_sample_file.empty();
}

Truth make_truth(const ExperimentConfig& cfg)
{
  json j = cfg.truth;
  if (!j.contains("dim"))
    j["dim"] = cfg.dim;
  return truth_from_json(j);
}

std::vector<double> to_vector(const Matrix& m)
{
  return m.column(0);
}

// posterior mean mixing CDF and density on `grid`, for Laplace noise of any scale
MixingSummary dpm_mixing(const std::vector<double>& Y,
                         const ExperimentConfig& cfg,
                         std::uint64_t seed,
                         const GridSpec& grid,
                         ChainSummary* chain_out = nullptr)
{
  if (cfg.noise.kind != NoiseKind::Laplace)
    throw ConfigError("the DPM sampler assumes Laplace noise");
  const double s = cfg.noise.scale;
  std::vector<double> scaled(Y);
  for (double& y : scaled)
    y /= s;
  ChainSummary chain = run_chain(scaled, cfg.prior, cfg.mcmc.iters, cfg.mcmc.burnin, cfg.mcmc.thin, seed);
  const GridSpec g{ grid.origin / s, grid.step / s, grid.length };
  MixingSummary m = posterior_mean_mixing(chain, g);
  m.density.origin = m.cdf.origin = grid.origin;
  m.density.step = m.cdf.step = grid.step;
  for (double& v : m.density.values)
    v /= s;
  if (chain_out)
    *chain_out = std::move(chain);
  return m;
}

double l1_distance(const GridFunction1D& a, const GridFunction1D& b)
{
  GridFunction1D d(a.origin, a.step, a.values, GridKind::signed_fn);
  for (std::size_t i = 0; i < d.size(); ++i)
    d.values[i] -= b.values[i];
  return trapezoid_abs(d);
}

Truth1D random_mixture(Rng& rng, int components)
{
  std::vector<double> w(components), m(components), s(components);
  double total = 0.0;
  for (int k = 0; k < components; ++k) {
    w[k] = standard_exponential(rng);
    total += w[k];
    m[k] = -2.0 + 4.0 * uniform01(rng);
    s[k] = 0.3 + 0.7 * uniform01(rng);
  }
  for (double& x : w)
    x /= total;
  return Truth1D::mixture(w, m, s);
}

} // namespace

std::string to_string(Task t)
{
  for (const auto& tn : task_names)
    if (tn.task == t)
      return tn.name;
  return "simulate";
}

Task task_from_string(const std::string& s)
{
  for (const auto& tn : task_names)
    if (s == tn.name)
      return tn.task;
  throw ConfigError("unknown task '" + s + "'");
}

DeconvConfig deconv_config_from_json(const json& j)
{
  DeconvConfig c;
  if (j.is_null())
    return c;
  c.rule = rule_from_string(j.value("bandwidth_rule", rule_to_string(c.rule)));
  c.bandwidth = j.value("bandwidth", c.bandwidth);
  c.grid = grid_from_json(j.contains("grid") ? j["grid"] : json(), c.grid);
  if (j.contains("kernel")) {
    const json& k = j["kernel"];
    if (k.is_string())
      c.kernel = { kernel_kind_from_string(k.get<std::string>()), 2 };
    else
      c.kernel = { kernel_kind_from_string(k.value("kind", std::string("tau1715"))), k.value("order", 2) };
  }
  c.direction_net_resolution = j.value("net_resolution", c.direction_net_resolution);
  c.projection_tolerance = j.value("projection_tolerance", c.projection_tolerance);
  c.imag_tolerance = j.value("imag_tolerance", c.imag_tolerance);
  c.surrogate_grid_length = j.value("surrogate_grid_length", c.surrogate_grid_length);
  c.surrogate_half_width = j.value("surrogate_half_width", c.surrogate_half_width);
  c.surrogate_max_iterations = j.value("surrogate_max_iterations", c.surrogate_max_iterations);
  return c;
}

ExperimentConfig config_from_json(const json& j)
{
  static const std::set<std::string> known = { "task",        "truth",     "truth_sample_file", "data_file", "noise",
                                               "dim",         "n",         "n_ladder",          "replications",
                                               "seed",        "output_dir", "estimator",        "deconv",    "prior",
                                               "mcmc",        "threads",   "slope_band",        "verify" };
  if (!j.is_object())
    throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : j.items())
    if (!known.count(key))
      throw ConfigError("unknown config key '" + key + "'");
  ExperimentConfig c;
  try {
    c.task = task_from_string(j.at("task").get<std::string>());
    if (j.contains("truth"))
      c.truth = j["truth"];
    c.truth_sample_file = j.value("truth_sample_file", std::string());
    c.data_file = j.value("data_file", std::string());
    if (j.contains("noise"))
      c.noise = noise_from_json(j["noise"]);
    c.dim = j.value("dim", c.dim);
    c.n = j.value("n", c.n);
    c.n_ladder = j.value("n_ladder", c.n_ladder);
    c.replications = j.value("replications", c.replications);
    c.seed = j.value("seed", c.seed);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.estimator = j.value("estimator", c.estimator);
    c.deconv = deconv_config_from_json(j.contains("deconv") ? j["deconv"] : json());
    c.deconv.dimension = c.dim;
    if (j.contains("prior"))
      c.prior = dpm_prior_from_json(j["prior"]);
    if (j.contains("mcmc")) {
      c.mcmc.iters = j["mcmc"].value("iters", c.mcmc.iters);
      c.mcmc.burnin = j["mcmc"].value("burnin", c.mcmc.burnin);
      c.mcmc.thin = j["mcmc"].value("thin", c.mcmc.thin);
    }
    c.threads = j.value("threads", c.threads);
    c.slope_band = j.value("slope_band", c.slope_band);
    if (j.contains("verify"))
      c.verify = j["verify"];
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config: ") + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  c.source = j;
  validate(c);
  return c;
}

void validate(const ExperimentConfig& c)
{
  if (c.dim < 1 || c.dim > 2)
    throw ConfigError("dim must be 1 or 2");
  if (c.replications < 1)
    throw ConfigError("replications must be at least 1");
  if (c.n < 1)
    throw ConfigError("n must be positive");
  for (std::size_t i = 1; i < c.n_ladder.size(); ++i)
    if (c.n_ladder[i] <= c.n_ladder[i - 1])
      throw ConfigError("n_ladder must be strictly increasing");
  if (c.task == Task::BenchmarkRate && c.n_ladder.empty())
    throw ConfigError("benchmark-rate needs an n_ladder");
  if (c.estimator != "kernel" && c.estimator != "dpm")
    throw ConfigError("estimator must be 'kernel' or 'dpm'");
  if (c.estimator == "dpm" && c.dim != 1)
    throw ConfigError("the DPM estimator is one-dimensional");
  if (!c.slope_band.empty() && (c.slope_band.size() != 2 || !(c.slope_band[0] < c.slope_band[1])))
    throw ConfigError("slope_band must be [lo, hi] with lo < hi");
  if (c.threads < 1)
    throw ConfigError("threads must be at least 1");
  if (c.mcmc.iters <= c.mcmc.burnin || c.mcmc.thin < 1)
    throw ConfigError("mcmc needs iters > burnin and thin >= 1");
  try {
    validate(c.noise);
    validate(c.deconv);
    validate(c.prior);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
}

std::uint64_t fnv1a64(std::string_view data)
{
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

std::string config_hash(const json& config)
{
  std::ostringstream o;
  o << std::hex << std::setw(16) << std::setfill('0') << fnv1a64(config.dump());
  return o.str();
}

SlopeFit fit_slope(const std::vector<RatePoint>& points)
{
  std::vector<double> x, y;
  for (const auto& p : points) {
    x.push_back(p.n);
    y.push_back(p.risk);
  }
  return fit_log_log(x, y);
}

std::uint64_t run_seed(std::uint64_t master, std::size_t n_index, std::size_t rep)
{
  return derive_seed(master, n_index, rep);
}

SimulatedData simulate_data(const ExperimentConfig& cfg, std::size_t n, std::uint64_t seed)
{
  Rng rng(seed);
  SimulatedData d;
  if (named_truth(cfg)) {
    d.X = make_truth(cfg).sample(n, rng);
  } else {
    const Matrix pool = read_matrix_csv(cfg.truth_sample_file);
    if (pool.cols != cfg.dim)
      throw ConfigError("truth sample file has the wrong number of columns");
    d.X = Matrix(n, cfg.dim);
    std::uniform_int_distribution<std::size_t> pick(0, pool.rows - 1);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t r = pick(rng);
      for (std::size_t j = 0; j < cfg.dim; ++j)
        d.X(i, j) = pool(r, j);
    }
  }
  const Matrix eps = sample_noise(cfg.noise, n, cfg.dim, rng);
  d.Y = d.X;
  for (std::size_t k = 0; k < d.Y.data.size(); ++k)
    d.Y.data[k] += eps.data[k];
  return d;
}

ExperimentResult benchmark_rate(const ExperimentConfig& cfg)
{
  validate(cfg);
  const bool named = named_truth(cfg);
  std::optional<Truth> truth;
  std::optional<EmpiricalMeasure> truth_sample;
  if (named)
    truth = make_truth(cfg);
  else
    truth_sample = EmpiricalMeasure::uniform(read_matrix_csv(cfg.truth_sample_file));
  const GridSpec grid = cfg.deconv.grid;
  GridFunction1D truth_cdf, truth_pdf;
  if (named && cfg.dim == 1) {
    truth_cdf = truth->coords[0].cdf_on(grid);
    truth_pdf = truth->coords[0].pdf_on(grid);
  }

  const std::size_t reps = cfg.replications;
  const std::size_t jobs = cfg.n_ladder.size() * reps;
  const std::function<RunRow(std::size_t)> job = [&](std::size_t k) {
    RunRow row;
    const std::size_t ni = k / reps;
    row.n = cfg.n_ladder[ni];
    row.rep = k % reps;
    row.seed = run_seed(cfg.seed, ni, row.rep);
    row.l1_density_risk = std::numeric_limits<double>::quiet_NaN();
    const auto t0 = std::chrono::steady_clock::now();
    try {
      const SimulatedData data = simulate_data(cfg, row.n, row.seed);
      if (cfg.estimator == "kernel") {
        const DeconvEstimate est = deconvolve(data.Y, cfg.noise, cfg.deconv);
        if (!named)
          row.w1_risk = w1_risk(est, *truth_sample);
        else if (cfg.dim == 1) {
          row.w1_risk = w1_risk(est, truth_cdf);
          row.l1_density_risk = l1_distance(est.raw_density, truth_pdf);
        } else {
          row.w1_risk = w1_risk(est, [&](const std::vector<double>& v, const GridSpec& g) {
            return truth->sliced_cdf(v, g);
          });
        }
      } else {
        const MixingSummary mix = dpm_mixing(to_vector(data.Y), cfg, derive_seed(row.seed, 1, 0), grid);
        if (named) {
          row.w1_risk = w1_cdf(mix.cdf, truth_cdf);
          row.l1_density_risk = l1_distance(mix.density, truth_pdf);
        } else {
          row.w1_risk = w1_cdf_vs_measure(mix.cdf, *truth_sample);
        }
      }
    } catch (const std::exception& e) {
      row.status = std::string("failed: ") + e.what();
      row.w1_risk = std::numeric_limits<double>::quiet_NaN();
    }
    row.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return row;
  };

  ExperimentResult res;
  res.rows = ordered_parallel_map<RunRow>(jobs, cfg.threads, job);
  for (std::size_t ni = 0; ni < cfg.n_ladder.size(); ++ni) {
    std::vector<double> ok;
    for (std::size_t r = 0; r < reps; ++r) {
      const RunRow& row = res.rows[ni * reps + r];
      if (row.status == "ok")
        ok.push_back(row.w1_risk);
    }
    if (!ok.empty())
      res.medians.push_back({ static_cast<double>(cfg.n_ladder[ni]), median(ok) });
  }
  const double beta = cfg.noise.beta();
  res.reference_slope = -1.0 / (2.0 * beta * static_cast<double>(cfg.dim) + 1.0);
  try {
    res.fit = fit_slope(res.medians);
    res.fitted = true;
  } catch (const TooFewPoints&) {
    res.fitted = false;
  }
  return res;
}

std::string results_csv(const std::vector<RunRow>& rows)
{
  std::ostringstream o;
  o << "n,rep,seed,w1_risk,l1_density_risk,status\n";
  for (const auto& r : rows) {
    std::string status = r.status;
    for (char& ch : status)
      if (ch == ',' || ch == '\n' || ch == '"')
        ch = ' ';
    o << r.n << ',' << r.rep << ',' << r.seed << ',' << fmt(r.w1_risk) << ',' << fmt(r.l1_density_risk) << ','
      << status << '\n';
  }
  return o.str();
}

namespace {

int task_simulate(const ExperimentConfig& cfg, std::ostream& log)
{
  const SimulatedData d = simulate_data(cfg, cfg.n, cfg.seed);
  const fs::path dir(cfg.output_dir);
  write_matrix_csv(dir / "X.csv", d.X, "x");
  write_matrix_csv(dir / "Y.csv", d.Y, "y");
  write_manifest(cfg, { "X.csv", "Y.csv" });
  log << "simulate: wrote " << d.X.rows << " rows to " << cfg.output_dir << "\n";
  return 0;
}

Matrix observed_data(const ExperimentConfig& cfg)
{
  if (cfg.data_file.empty())
    return simulate_data(cfg, cfg.n, cfg.seed).Y;
  Matrix Y = read_matrix_csv(cfg.data_file);
  if (Y.cols != cfg.dim)
    throw ConfigError("data file has the wrong number of columns");
  return Y;
}

int task_estimate(const ExperimentConfig& cfg, std::ostream& log)
{
  const Matrix Y = observed_data(cfg);
  const auto t0 = std::chrono::steady_clock::now();
  const DeconvEstimate est = deconvolve(Y, cfg.noise, cfg.deconv);
  const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  const fs::path dir(cfg.output_dir);
  std::vector<std::string> files;

  if (est.dimension == 1) {
    csv::Table density{ { "x", "raw_density" }, {} };
    csv::Table cdf{ { "x", "raw_cdf", "projected_cdf" }, {} };
    for (std::size_t i = 0; i < est.raw_cdf.size(); ++i) {
      density.rows.push_back({ est.raw_density.x(i), est.raw_density.values[i] });
      cdf.rows.push_back({ est.raw_cdf.x(i), est.raw_cdf.values[i], est.projected_cdf.values[i] });
    }
    csv::write((dir / "density.csv").string(), density);
    csv::write((dir / "cdf.csv").string(), cdf);
    files = { "density.csv", "cdf.csv" };
  } else {
    csv::Table t{ { "direction", "v1", "v2", "x", "raw_cdf", "projected_cdf" }, {} };
    for (std::size_t k = 0; k < est.per_direction.size(); ++k) {
      const auto& pd = est.per_direction[k];
      for (std::size_t i = 0; i < pd.raw_cdf.size(); ++i)
        t.rows.push_back({ static_cast<double>(k),
                           pd.direction[0],
                           pd.direction[1],
                           pd.raw_cdf.x(i),
                           pd.raw_cdf.values[i],
                           pd.projected_cdf.values[i] });
    }
    csv::write((dir / "sliced_cdf.csv").string(), t);
    files.push_back("sliced_cdf.csv");
  }
  write_measure_csv((dir / "measure.csv").string(), est.measure);
  files.push_back("measure.csv");

  json s;
  s["n"] = Y.rows;
  s["dim"] = est.dimension;
  s["bandwidth"] = est.bandwidth;
  s["negative_mass"] = est.diagnostics.negative_mass;
  s["projection_distance"] = est.diagnostics.projection_distance;
  s["runtime_ms"] = ms;
  if (est.dimension == 2)
    s["surrogate"] = { { "iterations", est.diagnostics.surrogate_iterations },
                       { "objective", est.diagnostics.surrogate_objective } };
  if (cfg.data_file.empty() && named_truth(cfg)) {
    const Truth truth = make_truth(cfg);
    if (est.dimension == 1)
      s["w1_risk"] = w1_risk(est, truth.coords[0].cdf_on(est.raw_cdf.spec()));
    else
      s["w1_risk"] = w1_risk(est, [&](const std::vector<double>& v, const GridSpec& g) {
        return truth.sliced_cdf(v, g);
      });
  }
  write_json(dir / "summary.json", s);
  files.push_back("summary.json");
  write_manifest(cfg, files);
  log << "estimate: bandwidth " << est.bandwidth << ", projection distance "
      << est.diagnostics.projection_distance << "\n";
  return 0;
}

int task_benchmark(const ExperimentConfig& cfg, std::ostream& log)
{
  const ExperimentResult res = benchmark_rate(cfg);
  const fs::path dir(cfg.output_dir);
  write_text(dir / "results.csv", results_csv(res.rows));
  {
    std::ostringstream o;
    o << "n,rep,runtime_ms\n";
    for (const auto& r : res.rows)
      o << r.n << ',' << r.rep << ',' << fmt(r.runtime_ms) << '\n';
    write_text(dir / "timings.csv", o.str());
  }
  json s;
  s["estimator"] = cfg.estimator;
  s["reference_slope"] = res.reference_slope;
  s["medians"] = json::array();
  for (const auto& p : res.medians)
    s["medians"].push_back({ { "n", p.n }, { "median_w1_risk", p.risk } });
  std::size_t failed = 0;
  for (const auto& r : res.rows)
    failed += r.status == "ok" ? 0 : 1;
  s["failed_runs"] = failed;
  bool pass = res.fitted;
  if (res.fitted) {
    s["fit"] = { { "slope", res.fit.slope }, { "intercept", res.fit.intercept }, { "r2", res.fit.r2 } };
    if (!cfg.slope_band.empty()) {
      pass = res.fit.slope >= cfg.slope_band[0] && res.fit.slope <= cfg.slope_band[1];
      s["slope_band"] = cfg.slope_band;
    }
  }
  s["pass"] = pass;
  write_json(dir / "summary.json", s);

  PlotSeries med{ "median W1 risk", {}, {}, false, "#1f77b4" };
  for (const auto& p : res.medians) {
    med.x.push_back(p.n);
    med.y.push_back(p.risk);
  }
  std::vector<PlotSeries> series{ med };
  if (res.fitted) {
    PlotSeries fitted{ "fitted slope", {}, {}, true, "#d62728" };
    PlotSeries ref{ "reference slope", {}, {}, true, "#7f7f7f" };
    for (const auto& p : res.medians) {
      fitted.x.push_back(p.n);
      fitted.y.push_back(std::exp(res.fit.intercept + res.fit.slope * std::log(p.n)));
      ref.x.push_back(p.n);
      ref.y.push_back(res.medians.front().risk * std::pow(p.n / res.medians.front().n, res.reference_slope));
    }
    series.push_back(fitted);
    series.push_back(ref);
  }
  write_loglog_svg((dir / "rate.svg").string(), "W1 risk against sample size", "n", "median W1 risk", series);
  write_manifest(cfg, { "results.csv", "timings.csv", "summary.json", "rate.svg" });
  if (res.fitted)
    log << "benchmark-rate: slope " << res.fit.slope << " (reference " << res.reference_slope << "), r2 "
        << res.fit.r2 << "\n";
  else
    log << "benchmark-rate: fewer than three ladder points succeeded, no slope fitted\n";
  return pass ? 0 : 2;
}

int task_posterior(const ExperimentConfig& cfg, std::ostream& log)
{
  if (cfg.dim != 1)
    throw ConfigError("posterior sampling is one-dimensional");
  const Matrix Y = observed_data(cfg);
  const fs::path dir(cfg.output_dir);
  std::vector<std::string> files;
  ChainSummary chain;
  const MixingSummary mix = dpm_mixing(to_vector(Y), cfg, derive_seed(cfg.seed, 1, 0), cfg.deconv.grid, &chain);

  csv::Table trace{ { "iteration", "loglik", "sigma", "clusters" }, {} };
  for (std::size_t i = 0; i < chain.trace_loglik.size(); ++i)
    trace.rows.push_back({ static_cast<double>(i + 1),
                           chain.trace_loglik[i],
                           chain.trace_sigma[i],
                           static_cast<double>(chain.trace_clusters[i]) });
  csv::write((dir / "traces.csv").string(), trace);
  {
    std::ostringstream states;
    for (const auto& st : chain.kept)
      states << json{ { "sigma", st.sigma }, { "locations", st.locations }, { "counts", st.counts },
                      { "loglik", st.loglik } }
                  .dump()
             << "\n";
    write_text(dir / "states.ndjson", states.str());
  }
  csv::Table m{ { "x", "density", "cdf" }, {} };
  for (std::size_t i = 0; i < mix.cdf.size(); ++i)
    m.rows.push_back({ mix.cdf.x(i), mix.density.values[i], mix.cdf.values[i] });
  csv::write((dir / "mixing.csv").string(), m);
  files = { "traces.csv", "states.ndjson", "mixing.csv" };

  json s;
  s["n"] = Y.rows;
  s["kept_states"] = chain.kept.size();
  s["sigma_acceptance"] = chain.sigma_acceptance;
  s["retries"] = chain.retries;
  s["prior"] = to_json(cfg.prior);
  bool pass = true;
  if (cfg.data_file.empty() && named_truth(cfg)) {
    const Truth truth = make_truth(cfg);
    s["w1_to_truth"] = w1_cdf(mix.cdf, truth.coords[0].cdf_on(mix.cdf.spec()));
  }
  if (cfg.verify.contains("geweke")) {
    const json& g = cfg.verify["geweke"];
    DPMPrior gp = g.contains("prior") ? dpm_prior_from_json(g["prior"]) : cfg.prior;
    const GewekeReport rep = geweke_test(g.value("n", std::size_t{ 4 }),
                                         g.value("sweeps", std::size_t{ 10000 }),
                                         gp,
                                         derive_seed(cfg.seed, 2, 0),
                                         g.value("band", 4.0));
    json stats = json::array();
    for (const auto& st : rep.stats)
      stats.push_back({ { "name", st.name },
                        { "prior_mean", st.prior_mean },
                        { "prior_se", st.prior_se },
                        { "chain_mean", st.chain_mean },
                        { "chain_se", st.chain_se },
                        { "z", st.z } });
    s["geweke"] = { { "stats", stats }, { "band", rep.band }, { "pass", rep.pass } };
    pass = rep.pass;
  }
  s["pass"] = pass;
  write_json(dir / "summary.json", s);
  files.push_back("summary.json");
  write_manifest(cfg, files);
  log << "posterior: " << chain.kept.size() << " kept states, sigma acceptance " << chain.sigma_acceptance << "\n";
  return pass ? 0 : 2;
}

int task_verify_inversion(const ExperimentConfig& cfg, std::ostream& log)
{
  const json& v = cfg.verify;
  const std::size_t pairs = v.value("pairs", std::size_t{ 20 });
  const std::vector<double> hs = v.value("h", std::vector<double>{ 0.2, 0.1, 0.05 });
  const int components = v.value("components", 3);
  const double growth_limit = v.value("max_ratio_growth", 2.0);
  const GridSpec grid = grid_from_json(v.contains("grid") ? v["grid"] : json(), GridSpec::centered(40.0, 8192));
  if (hs.size() < 2)
    throw ConfigError("verify-inversion needs at least two h values");
  if (components < 1)
    throw ConfigError("components must be positive");

  const std::function<InversionReport(std::size_t)> job = [&](std::size_t p) {
    Rng rng(derive_seed(cfg.seed, p, 0));
    const Truth1D a = random_mixture(rng, components);
    const Truth1D b = random_mixture(rng, components);
    return inversion_rhs(a.pdf_on(grid), b.pdf_on(grid), cfg.noise, hs);
  };
  const auto reports = ordered_parallel_map<InversionReport>(pairs, cfg.threads, job);

  std::ostringstream o;
  o << "pair,h,lhs,bias_term,w1_y_term,T_term,rhs,ratio\n";
  std::vector<double> max_ratio(hs.size(), 0.0);
  double worst_growth = 0.0;
  bool finite = true;
  const auto largest = std::max_element(hs.begin(), hs.end()) - hs.begin();
  const auto smallest = std::min_element(hs.begin(), hs.end()) - hs.begin();
  for (std::size_t p = 0; p < reports.size(); ++p) {
    const auto& rows = reports[p].rows;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      const auto& r = rows[k];
      o << p << ',' << fmt(r.h) << ',' << fmt(r.lhs) << ',' << fmt(r.bias_term) << ',' << fmt(r.w1_y_term) << ','
        << fmt(r.T_term) << ',' << fmt(r.rhs) << ',' << fmt(r.ratio) << '\n';
      finite = finite && std::isfinite(r.ratio);
      max_ratio[k] = std::max(max_ratio[k], r.ratio);
    }
    if (rows[largest].ratio > 0.0)
      worst_growth = std::max(worst_growth, rows[smallest].ratio / rows[largest].ratio);
  }
  const bool pass = finite && worst_growth <= growth_limit;
  const fs::path dir(cfg.output_dir);
  write_text(dir / "inversion.csv", o.str());
  json verdict;
  verdict["ratio_bounds"] = json::array();
  for (std::size_t k = 0; k < hs.size(); ++k)
    verdict["ratio_bounds"].push_back({ { "h", hs[k] }, { "max_ratio", max_ratio[k] } });
  verdict["max_ratio_growth"] = worst_growth;
  verdict["growth_limit"] = growth_limit;
  verdict["log_base"] = "natural";
  verdict["all_finite"] = finite;
  verdict["pass"] = pass;
  write_json(dir / "verdict.json", verdict);
  write_manifest(cfg, { "inversion.csv", "verdict.json" });
  log << "verify-inversion: worst ratio growth " << worst_growth << " (limit " << growth_limit << ")\n";
  return pass ? 0 : 2;
}

int task_verify_approx(const ExperimentConfig& cfg, std::ostream& log)
{
  const json& v = cfg.verify;
  const int m = v.value("m", 3);
  const std::vector<double> sigmas = v.value("sigma", std::vector<double>{ 0.4, 0.2, 0.1, 0.05 });
  const GridSpec grid = grid_from_json(v.contains("grid") ? v["grid"] : json(), GridSpec::centered(25.0, 4096));
  const double min_slope = v.value("min_error_slope", 7.0);
  const double min_shrink = v.value("min_mass_shrink", 8.0);
  const double identity_tol = v.value("identity_tol", 1e-9);

  const GridFunction1D f0 = make_truth(cfg).coords[0].pdf_on(grid);
  struct Row
  {
    double sigma, freq, direct, mass_minus, mass_plus, identity;
  };
  const std::function<Row(std::size_t)> job = [&](std::size_t k) {
    const double s = sigmas[k];
    Row r{ s, approx_error_L2(f0, m, s), approx_error_L2_direct(f0, m, s), 0, 0, 0 };
    r.mass_minus = std::abs(trapezoid(h_m_b_sigma(f0, m, -0.5, s)) - 1.0);
    r.mass_plus = std::abs(trapezoid(h_m_b_sigma(f0, m, 0.5, s)) - 1.0);
    r.identity = std::max(identity_residual(f0, m, -0.5, s), identity_residual(f0, m, 0.5, s));
    return r;
  };
  const auto rows = ordered_parallel_map<Row>(sigmas.size(), cfg.threads, job);

  std::ostringstream o;
  o << "sigma,error_l2,error_l2_direct,mass_dev_minus,mass_dev_plus,identity_residual\n";
  std::vector<double> xs, es;
  double worst_identity = 0.0, min_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Row& r = rows[k];
    o << fmt(r.sigma) << ',' << fmt(r.freq) << ',' << fmt(r.direct) << ',' << fmt(r.mass_minus) << ','
      << fmt(r.mass_plus) << ',' << fmt(r.identity) << '\n';
    xs.push_back(r.sigma);
    es.push_back(r.freq);
    worst_identity = std::max(worst_identity, r.identity);
  }
  // mass deviation shrink factor between consecutive halvings
  for (std::size_t k = 0; k + 1 < rows.size(); ++k)
    if (std::abs(rows[k + 1].sigma - 0.5 * rows[k].sigma) < 1e-12)
      min_ratio = std::min({ min_ratio,
                             rows[k].mass_minus / rows[k + 1].mass_minus,
                             rows[k].mass_plus / rows[k + 1].mass_plus });
  const double slope = fit_log_log(xs, es).slope;

  // CDF bias ladder
  json bias_json = json::object();
  bool bias_pass = true;
  std::string bias_csv = "h,bias,precondition_ok\n";
  if (v.contains("bias")) {
    const json& b = v["bias"];
    const std::vector<double> hs = b.value("h", std::vector<double>{ 0.1, 0.05, 0.025 });
    const Truth1D mix = Truth1D::mixture(b.value("weights", std::vector<double>{ 0.5, 0.5 }),
                                         b.value("means", std::vector<double>{ -1.0, 1.0 }),
                                         b.value("sds", std::vector<double>{ 0.3, 0.3 }));
    const KernelSpec kernel{ kernel_kind_from_string(b.value("kernel", std::string("flat-top"))),
                             b.value("order", 2) };
    const double alpha = b.value("alpha", 2.0);
    const GridSpec bg = grid_from_json(b.contains("grid") ? b["grid"] : json(), GridSpec::centered(20.0, 8192));
    std::vector<double> values;
    for (double h : hs) {
      const BiasReport r = cdf_bias_norm(mix, kernel, h, alpha, bg);
      values.push_back(r.value);
      bias_csv += fmt(h) + "," + fmt(r.value) + "," + (r.precondition_ok ? "1" : "0") + "\n";
    }
    const double bslope = fit_log_log(hs, values).slope;
    const double need = b.value("min_slope", alpha + 1.0 - 0.3);
    bias_pass = bslope >= need;
    bias_json = { { "slope", bslope }, { "min_slope", need }, { "pass", bias_pass } };
  }

  const bool pass = slope >= min_slope && min_ratio >= min_shrink && worst_identity <= identity_tol && bias_pass;
  const fs::path dir(cfg.output_dir);
  write_text(dir / "approx.csv", o.str());
  std::vector<std::string> files{ "approx.csv" };
  if (v.contains("bias")) {
    write_text(dir / "bias.csv", bias_csv);
    files.push_back("bias.csv");
  }
  json verdict;
  verdict["slope_estimates"] = { { "approx_error_l2", slope }, { "cdf_bias", bias_json } };
  verdict["min_error_slope"] = min_slope;
  verdict["min_mass_shrink"] = min_ratio;
  verdict["identity_max_residual"] = worst_identity;
  verdict["pass"] = pass;
  write_json(dir / "verdict.json", verdict);
  files.push_back("verdict.json");
  write_manifest(cfg, files);
  log << "verify-approx: error slope " << slope << ", mass shrink " << min_ratio << ", identity residual "
      << worst_identity << "\n";
  return pass ? 0 : 2;
}

int task_lowerbound(const ExperimentConfig& cfg, std::ostream& log)
{
  const json& v = cfg.verify;
  PerturbedFamilySpec base;
  base.r = v.value("r", base.r);
  base.alpha = v.value("alpha", base.alpha);
  base.b = v.value("b", base.b);
  base.C = v.value("C", 0.0);
  const std::size_t members = v.value("members", std::size_t{ 4 });
  const std::vector<int> ladder = v.value("chi2_ladder", std::vector<int>{ 8, 16, 32 });
  const GridSpec grid = grid_from_json(v.contains("grid") ? v["grid"] : json(), GridSpec::centered(64.0, 8192));
  if (base.C == 0.0)
    base.C = default_amplitude(base.r, base.alpha, base.b);
  base.theta.assign(base.b, 0);
  validate(base);

  const fs::path dir(cfg.output_dir);
  std::vector<std::string> files;
  json reports = json::array();
  bool pass = true;
  Rng rng(cfg.seed);
  for (std::size_t k = 0; k <= members; ++k) {
    PerturbedFamilySpec s = base;
    if (k > 0)
      for (int& bit : s.theta)
        bit = uniform01(rng) < 0.5 ? 1 : 0;
    const FamilyReport r = verify_family(s);
    pass = pass && r.pass;
    reports.push_back({ { "member", k },
                        { "theta", s.theta },
                        { "is_density", r.is_density },
                        { "integral", r.integral },
                        { "min_value", r.min_value },
                        { "m1_bound", r.m1_bound },
                        { "sobolev_norm", r.sobolev_norm },
                        { "pass", r.pass } });
    const std::string name = k == 0 ? "base.csv" : "member_" + std::to_string(k) + ".csv";
    write_grid_csv((dir / name).string(), perturbed_density_on(s, grid));
    files.push_back(name);
  }

  std::vector<double> bs, chis;
  std::string chi_csv = "b,chi2,scaled\n";
  const double exponent = 2.0 * (base.alpha + cfg.noise.beta()) + 1.0;
  for (int b : ladder) {
    PerturbedFamilySpec s = base;
    s.b = b;
    s.theta.assign(b, 0);
    const double c = single_flip_chi2(s, cfg.noise, (b + 1) / 2);
    bs.push_back(b);
    chis.push_back(c);
    chi_csv += std::to_string(b) + "," + fmt(c) + "," + fmt(c * std::pow(b, exponent)) + "\n";
  }
  json chi = json::object();
  if (bs.size() >= 3) {
    const double slope = fit_log_log(bs, chis).slope;
    const bool ok = std::abs(slope + exponent) <= v.value("slope_tolerance", 0.5);
    chi = { { "slope", slope }, { "reference", -exponent }, { "pass", ok } };
    pass = pass && ok;
  }
  write_text(dir / "chi2.csv", chi_csv);
  files.push_back("chi2.csv");
  json rep;
  rep["amplitude"] = base.C;
  rep["members"] = reports;
  rep["chi2_scaling"] = chi;
  rep["pass"] = pass;
  write_json(dir / "report.json", rep);
  files.push_back("report.json");
  write_manifest(cfg, files);
  log << "lowerbound-family: " << members + 1 << " densities checked, pass " << (pass ? "yes" : "no") << "\n";
  return pass ? 0 : 2;
}

} // namespace

int run_task(const ExperimentConfig& cfg, std::ostream& log)
{
  ensure_dir(cfg.output_dir);
  switch (cfg.task) {
    case Task::Simulate: return task_simulate(cfg, log);
    case Task::Estimate: return task_estimate(cfg, log);
    case Task::BenchmarkRate: return task_benchmark(cfg, log);
    case Task::Posterior: return task_posterior(cfg, log);
    case Task::VerifyInversion: return task_verify_inversion(cfg, log);
    case Task::VerifyApprox: return task_verify_approx(cfg, log);
    case Task::LowerboundFamily: return task_lowerbound(cfg, log);
  }
  return 1;
}

} // namespace wdeconv
