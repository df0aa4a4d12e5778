#include "wdeconv/errors.hpp"
#include "wdeconv/harness.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace wdeconv;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
  const fs::path p = fs::temp_directory_path() / ("wdeconv_harness_" + name);
  fs::remove_all(p);
  return p;
}

json read_json(const fs::path& p)
{
  std::ifstream in(p);
  return json::parse(in);
}

std::string read_text(const fs::path& p)
{
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

json small_benchmark()
{
  return { { "task", "benchmark-rate" },
           { "truth", { { "name", "gaussian" } } },
           { "n_ladder", { 128, 256, 512 } },
           { "replications", 3 },
           { "seed", 4 } };
}

} // namespace

TEST_CASE("task names")
{
  for (const char* name : { "simulate", "estimate", "benchmark-rate", "posterior", "verify-inversion",
                            "verify-approx", "lowerbound-family" })
    CHECK(to_string(task_from_string(name)) == name);
  CHECK_THROWS_AS(task_from_string("fit"), ConfigError);
}

TEST_CASE("config parsing rejects malformed input")
{
  CHECK_THROWS_AS(config_from_json(json::array()), ConfigError);
  CHECK_THROWS_AS(config_from_json({ { "n", 10 } }), ConfigError);
  CHECK_THROWS_AS(config_from_json({ { "task", "simulate" }, { "nn", 10 } }), ConfigError);
  CHECK_THROWS_AS(config_from_json({ { "task", "simulate" }, { "n", "ten" } }), ConfigError);
  CHECK_THROWS_AS(config_from_json({ { "task", "simulate" }, { "dim", 3 } }), ConfigError);
  CHECK_THROWS_AS(config_from_json({ { "task", "simulate" }, { "n_ladder", { 100, 50, 200 } } }), ConfigError);
  CHECK_THROWS_AS(config_from_json({ { "task", "simulate" }, { "noise", { { "kind", "cauchy" } } } }), ConfigError);
  CHECK_THROWS_AS(config_from_json({ { "task", "estimate" }, { "deconv", { { "bandwidth_rule", "silverman" } } } }),
                  ConfigError);
  CHECK_THROWS_AS(config_from_json({ { "task", "estimate" }, { "deconv", { { "grid", { { "length", 1000 } } } } } }),
                  ConfigError);
  const ExperimentConfig c = config_from_json({ { "task", "estimate" }, { "n", 50 }, { "dim", 2 } });
  CHECK(c.n == 50);
  CHECK(c.deconv.dimension == 2);
}

TEST_CASE("every shipped config parses")
{
  std::size_t count = 0;
  for (const auto& e : fs::directory_iterator(fs::path(WDECONV_SOURCE_DIR) / "configs")) {
    if (e.path().extension() != ".json")
      continue;
    std::ifstream in(e.path());
    INFO(e.path().string());
    CHECK_NOTHROW(config_from_json(json::parse(in)));
    ++count;
  }
  CHECK(count >= 7);
}

TEST_CASE("FNV-1a reference values")
{
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  CHECK(config_hash(json::object()) == "08f44b07b5901a25");
  CHECK(config_hash({ { "a", 1 } }).size() == 16);
}

TEST_CASE("config hashes ignore key order but not values")
{
  const json a = json::parse(R"({"task":"simulate","n":10,"seed":3})");
  const json b = json::parse(R"({"seed":3,"n":10,"task":"simulate"})");
  const json c = json::parse(R"({"seed":4,"n":10,"task":"simulate"})");
  CHECK(config_hash(a) == config_hash(b));
  CHECK(config_hash(a) != config_hash(c));
}

TEST_CASE("slope fit over rate points")
{
  std::vector<RatePoint> pts;
  for (double n : { 100.0, 400.0, 1600.0 })
    pts.push_back({ n, 2.0 / std::sqrt(n) });
  CHECK(fit_slope(pts).slope == doctest::Approx(-0.5).epsilon(1e-12));
  CHECK_THROWS_AS(fit_slope({ { 1.0, 1.0 }, { 2.0, 0.5 } }), TooFewPoints);
}

TEST_CASE("run seeds are distinct and reproducible")
{
  CHECK(run_seed(1, 0, 0) == run_seed(1, 0, 0));
  CHECK(run_seed(1, 0, 1) != run_seed(1, 1, 0));
  CHECK(run_seed(1, 0, 0) != run_seed(2, 0, 0));
}

TEST_CASE("ordered parallel map keeps order and forwards failures")
{
  const std::function<std::size_t(std::size_t)> square = [](std::size_t i) { return i * i; };
  for (std::size_t threads : { 1, 3, 8 }) {
    const auto out = ordered_parallel_map<std::size_t>(50, threads, square);
    for (std::size_t i = 0; i < out.size(); ++i)
      CHECK(out[i] == i * i);
  }
  const std::function<int(std::size_t)> boom = [](std::size_t i) -> int {
    if (i == 7)
      throw DomainError("boom");
    return 0;
  };
  CHECK_THROWS_AS(ordered_parallel_map<int>(20, 4, boom), DomainError);
  CHECK(ordered_parallel_map<int>(0, 4, boom).empty());
}

TEST_CASE("simulation is a function of the seed")
{
  const ExperimentConfig c = config_from_json({ { "task", "simulate" }, { "n", 20 } });
  const SimulatedData a = simulate_data(c, 20, 9), b = simulate_data(c, 20, 9), d = simulate_data(c, 20, 10);
  CHECK(a.X.data == b.X.data);
  CHECK(a.Y.data == b.Y.data);
  CHECK(a.Y.data != d.Y.data);
  CHECK(a.Y.rows == 20);
}

TEST_CASE("benchmark results do not depend on the thread count")
{
  ExperimentConfig one = config_from_json(small_benchmark());
  ExperimentConfig many = one;
  many.threads = 4;
  const ExperimentResult a = benchmark_rate(one), b = benchmark_rate(many);
  CHECK(results_csv(a.rows) == results_csv(b.rows));
  CHECK(a.rows.size() == 9);
  CHECK(a.fitted);
  CHECK(a.medians.size() == 3);
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    CHECK(a.rows[i].n == (std::vector<std::size_t>{ 128, 256, 512 })[i / 3]);
    CHECK(a.rows[i].rep == i % 3);
    CHECK(a.rows[i].status == "ok");
  }
  CHECK(results_csv(a.rows).find("runtime") == std::string::npos);
}

TEST_CASE("task outputs and manifest")
{
  const fs::path dir = scratch("bench");
  json j = small_benchmark();
  j["output_dir"] = dir.string();
  const ExperimentConfig c = config_from_json(j);
  std::ostringstream log;
  run_task(c, log);
  for (const char* f : { "results.csv", "timings.csv", "summary.json", "rate.svg", "manifest.json" })
    CHECK(fs::exists(dir / f));
  const json m = read_json(dir / "manifest.json");
  CHECK(m["task"] == "benchmark-rate");
  CHECK(m["config_hash"] == config_hash(j));
  CHECK(m["seed"] == 4);
  const std::string svg = read_text(dir / "rate.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  std::size_t series = 0;
  for (auto p = svg.find("class=\"series\""); p != std::string::npos; p = svg.find("class=\"series\"", p + 1))
    ++series;
  CHECK(series == 3);

  const fs::path sim = scratch("simulate");
  const ExperimentConfig s =
    config_from_json({ { "task", "simulate" }, { "n", 25 }, { "dim", 2 }, { "output_dir", sim.string() } });
  CHECK(run_task(s, log) == 0);
  const std::string y = read_text(sim / "Y.csv");
  CHECK(y.rfind("y1,y2\n", 0) == 0);
  CHECK(std::count(y.begin(), y.end(), '\n') == 26);

  // estimate from the simulated file
  const fs::path est = scratch("estimate");
  const ExperimentConfig e = config_from_json(
    { { "task", "estimate" }, { "dim", 2 }, { "data_file", (sim / "Y.csv").string() }, { "output_dir", est.string() },
      { "deconv", { { "grid", { { "half_width", 12 }, { "length", 256 } } }, { "net_resolution", 0.3 } } } });
  CHECK(run_task(e, log) == 0);
  CHECK(fs::exists(est / "sliced_cdf.csv"));
  CHECK(fs::exists(est / "measure.csv"));
  const json summary = read_json(est / "summary.json");
  CHECK(summary.contains("bandwidth"));
  fs::remove_all(dir);
  fs::remove_all(sim);
  fs::remove_all(est);
}
