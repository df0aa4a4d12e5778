//! Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "wdeconv/approx_theory.hpp"
#include "wdeconv/bayes_dpm.hpp"
#include "wdeconv/deconv_kde.hpp"
#include "wdeconv/errors.hpp"
#include "wdeconv/harness.hpp"
#include "wdeconv/lower_bounds.hpp"
#include "wdeconv/stats.hpp"
#include "wdeconv/wasserstein.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

using namespace wdeconv;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Outcome
{
  bool pass = false;
  std::string detail;
};

json load_config(const std::string& name)
{
  std::ifstream in(fs::path(WDECONV_SOURCE_DIR) / "configs" / name);
  if (!in)
    throw IoError("missing config " + name);
  return json::parse(in);
}

std::size_t worker_count() { return std::max(1u, std::thread::hardware_concurrency()); }

fs::path scratch(const std::string& name)
{
  const fs::path p = fs::temp_directory_path() / ("wdeconv_acceptance_" + name);
  fs::remove_all(p);
  return p;
}

std::string read_text(const fs::path& p)
{
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string num(double v)
{
  std::ostringstream o;
  o.precision(4);
  o << v;
  return o.str();
}

EmpiricalMeasure random_measure(Rng& rng, std::size_t d)
{
  const std::size_t n = 1 + static_cast<std::size_t>(uniform01(rng) * 8.0);
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

Outcome w1_oracle()
{
  Rng rng(101);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const auto p = random_measure(rng, 1), q = random_measure(rng, 1);
    worst = std::max(worst, std::abs(w1_empirical_1d(p, q) - exact_w1_small(p, q)));
  }
  return { worst <= 1e-10, "max deviation " + num(worst) };
}

Outcome sandwich()
{
  Rng rng(202);
  const auto net = build_direction_net(2, 0.01);
  bool ok = true;
  double max_ratio = 0.0;
  for (int k = 0; k < 500; ++k) {
    const auto p = random_measure(rng, 2), q = random_measure(rng, 2);
    const double exact = exact_w1_small(p, q);
    const double sliced = max_sliced_w1(p, q, net).value;
    ok = ok && sliced <= exact + 1e-9;
    if (sliced > 0.0)
      max_ratio = std::max(max_ratio, exact / sliced);
    else
      ok = ok && exact == 0.0;
  }
  ok = ok && std::isfinite(max_ratio);
  return { ok, "max exact/max-sliced ratio " + num(max_ratio) };
}

Outcome frequentist_rate()
{
  ExperimentConfig cfg = config_from_json(load_config("benchmark_rate.json"));
  cfg.threads = worker_count();
  const ExperimentResult r = benchmark_rate(cfg);
  const bool ok = r.fitted && r.fit.slope >= -0.35 && r.fit.slope <= -0.10;
  return { ok, "slope " + num(r.fit.slope) + " (band [-0.35, -0.10])" };
}

Outcome cdf_bias()
{
  const Truth1D mix = Truth1D::mixture({ 0.5, 0.5 }, { -1.0, 1.0 }, { 0.3, 0.3 });
  const std::vector<double> hs{ 0.1, 0.05, 0.025 };
  std::vector<double> vals;
  bool pre = true;
  for (double h : hs) {
    const BiasReport b = cdf_bias_norm(mix, KernelSpec::flat_top(), h, 2.0, GridSpec::centered(20.0, 8192));
    vals.push_back(b.value);
    pre = pre && b.precondition_ok;
  }
  const double slope = fit_log_log(hs, vals).slope;
  return { slope >= 2.7, "slope " + num(slope) + (pre ? "" : " (precondition flagged)") };
}

Outcome approximation()
{
  const GridSpec g = GridSpec::centered(25.0, 4096);
  const GridFunction1D f0 = Truth1D::gaussian().pdf_on(g);
  const std::vector<double> sigmas{ 0.4, 0.2, 0.1, 0.05 };
  std::vector<double> errs, mass;
  for (double s : sigmas) {
    errs.push_back(approx_error_L2(f0, 3, s));
    mass.push_back(std::max(std::abs(trapezoid(h_m_b_sigma(f0, 3, -0.5, s)) - 1.0),
                            std::abs(trapezoid(h_m_b_sigma(f0, 3, 0.5, s)) - 1.0)));
  }
  const double slope = fit_log_log(sigmas, errs).slope;
  double shrink = 1e300;
  for (std::size_t k = 0; k + 1 < mass.size(); ++k)
    shrink = std::min(shrink, mass[k] / mass[k + 1]);
  return { slope >= 7.0 && shrink >= 8.0, "error slope " + num(slope) + ", min mass shrink " + num(shrink) };
}

Outcome inversion()
{
  json j = load_config("verify_inversion.json");
  const fs::path dir = scratch("inversion");
  j["output_dir"] = dir.string();
  ExperimentConfig cfg = config_from_json(j);
  cfg.threads = worker_count();
  std::ostringstream log;
  const int code = run_task(cfg, log);
  std::ifstream in(dir / "verdict.json");
  const json v = json::parse(in);
  fs::remove_all(dir);
  const bool ok = code == 0 && v["pass"].get<bool>() && v["all_finite"].get<bool>();
  return { ok, "worst ratio growth h=0.2 to h=0.05: " + num(v["max_ratio_growth"].get<double>()) };
}

Outcome bayes()
{
  DPMPrior gp;
  gp.b0 = 0.5;
  gp.sigma_step = 1.0;
  const GewekeReport g = geweke_test(4, 10000, gp, 707, 4.0);
  double worst_z = 0.0;
  for (const auto& s : g.stats)
    worst_z = std::max(worst_z, std::abs(s.z));

  ExperimentConfig cfg = config_from_json(load_config("benchmark_dpm.json"));
  cfg.threads = worker_count();
  const ExperimentResult r = benchmark_rate(cfg);
  const std::size_t reps = cfg.replications, levels = cfg.n_ladder.size();
  bool decreasing = r.medians.size() == levels;
  for (std::size_t k = 0; decreasing && k + 1 < levels; ++k)
    decreasing = r.medians[k + 1].risk < r.medians[k].risk;
  // one-sided paired sign test of the smallest against the largest n
  std::size_t wins = 0;
  for (std::size_t rep = 0; rep < reps; ++rep)
    if (r.rows[(levels - 1) * reps + rep].w1_risk < r.rows[rep].w1_risk)
      ++wins;
  double p = 0.0;
  for (std::size_t k = wins; k <= reps; ++k)
    p += std::exp(std::lgamma(reps + 1.0) - std::lgamma(k + 1.0) - std::lgamma(reps - k + 1.0)) * std::pow(0.5, reps);
  const bool ok = g.pass && decreasing && p <= 0.05;
  std::string med;
  for (const auto& m : r.medians)
    med += (med.empty() ? "" : " > ") + num(m.risk);
  return { ok, std::string("Geweke ") + (g.pass ? "pass" : "fail") + " (max |z| " + num(worst_z) + "), medians " + med +
                 ", sign test " + std::to_string(wins) + "/" + std::to_string(reps) + " p=" + num(p) };
}

Outcome lower_bound_family()
{
  // the amplitude is a property of the family: fixed once, then b varies
  PerturbedFamilySpec base;
  base.C = default_amplitude(base.r, base.alpha, base.b);
  bool ok = true;
  double worst_mass = 0.0, sobolev = 0.0;
  Rng rng(808);
  for (int k = 0; k <= 4; ++k) {
    PerturbedFamilySpec s = base;
    s.theta.assign(s.b, 0);
    if (k > 0)
      for (int& bit : s.theta)
        bit = uniform01(rng) < 0.5 ? 1 : 0;
    const FamilyReport r = verify_family(s);
    worst_mass = std::max(worst_mass, std::abs(r.integral - 1.0));
    sobolev = std::max(sobolev, r.sobolev_norm);
    ok = ok && r.pass && r.min_value >= 0.0 && std::isfinite(r.sobolev_norm);
  }
  ok = ok && worst_mass <= 1e-6;
  std::vector<double> bs, chis;
  for (int b : { 8, 16, 32 }) {
    PerturbedFamilySpec s = base;
    s.b = b;
    s.theta.assign(b, 0);
    bs.push_back(b);
    chis.push_back(single_flip_chi2(s, NoiseModel::laplace(), (b + 1) / 2));
  }
  const double slope = fit_log_log(bs, chis).slope;
  const double ref = -(2.0 * (base.alpha + 2.0) + 1.0);
  ok = ok && std::abs(slope - ref) <= 0.5;
  return { ok, "mass error " + num(worst_mass) + ", Sobolev norm " + num(sobolev) + ", chi2 slope " + num(slope) +
                 " (reference " + num(ref) + ")" };
}

double l1_to(const std::vector<double>& a, const std::vector<double>& b)
{
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    s += std::abs(a[i] - b[i]);
  return s;
}

// The L1 isotonic optimum is attained on the data values, so enumerating the
// nondecreasing level sequences with pinned ends solves the LP exactly.
double oracle(const std::vector<double>& raw, const std::vector<double>& levels)
{
  const std::size_t n = raw.size();
  std::vector<double> cur(n);
  double best = 1e300;
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t lo) {
    if (i == n) {
      best = std::min(best, l1_to(cur, raw));
      return;
    }
    for (std::size_t k = lo; k < levels.size(); ++k) {
      if ((i == 0 && levels[k] != 0.0) || (i + 1 == n && levels[k] != 1.0))
        continue;
      cur[i] = levels[k];
      rec(i + 1, k);
    }
  };
  rec(0, 0);
  return best;
}

Outcome projection()
{
  const std::vector<double> levels{ 0.0, 0.25, 0.5, 0.75, 1.0 };
  double worst = 0.0;
  std::size_t cases = 0;
  bool valid = true;
  for (std::size_t len = 2; len <= 6; ++len) {
    std::vector<std::size_t> idx(len, 0);
    for (;;) {
      std::vector<double> v(len);
      for (std::size_t i = 0; i < len; ++i)
        v[i] = levels[idx[i]];
      const GridFunction1D p = project_to_cdf({ 0.0, 1.0, v, GridKind::signed_fn });
      worst = std::max(worst, std::abs(l1_to(p.values, v) - oracle(v, levels)));
      try {
        check_invariants(p);
      } catch (const Error&) {
        valid = false;
      }
      valid = valid && p.values.front() == 0.0 && p.values.back() == 1.0;
      ++cases;
      std::size_t k = 0;
      while (k < len && ++idx[k] == levels.size())
        idx[k++] = 0;
      if (k == len)
        break;
    }
  }
  return { worst <= 1e-9 && valid,
           std::to_string(cases) + " grids, max objective gap " + num(worst) + (valid ? "" : ", invalid CDF output") };
}

Outcome determinism()
{
  std::vector<std::string> hashes;
  for (int run = 0; run < 3; ++run) {
    json j = load_config("benchmark_rate.json");
    const fs::path dir = scratch("determinism_" + std::to_string(run));
    j["output_dir"] = dir.string();
    ExperimentConfig cfg = config_from_json(j);
    cfg.threads = run == 2 ? worker_count() + 2 : 1;
    std::ostringstream log;
    run_task(cfg, log);
    hashes.push_back(config_hash(json(read_text(dir / "results.csv"))));
    fs::remove_all(dir);
  }
  const bool ok = hashes[0] == hashes[1] && hashes[1] == hashes[2];
  return { ok, "results.csv hash " + hashes[0] + (ok ? " on all reruns" : " differs across reruns") };
}

} // namespace

int main()
{
  struct Criterion
  {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
    { "W1 oracle agreement", 10.0, w1_oracle },
    { "sliced/exact sandwich", 60.0, sandwich },
    { "frequentist rate", 600.0, frequentist_rate },
    { "CDF bias slope", 30.0, cdf_bias },
    { "approximation bound", 60.0, approximation },
    { "inversion ratio stability", 120.0, inversion },
    { "Bayesian direction checks", 1200.0, bayes },
    { "lower-bound family", 120.0, lower_bound_family },
    { "projection correctness", 0.0, projection },
    { "determinism", 0.0, determinism },
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto& c = criteria[i];
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = { false, std::string("error: ") + e.what() };
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = c.budget_s == 0.0 || secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    failures += pass ? 0 : 1;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << c.name << "): " << o.detail << "; "
              << num(secs) << " s" << (in_time ? "" : " over budget") << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
