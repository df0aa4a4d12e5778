//! deconv-w1: command-line front end for the experiment harness.

#include "wdeconv/errors.hpp"
#include "wdeconv/harness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

int main(int argc, char** argv)
{
  CLI::App app{ "Deconvolution in Wasserstein distance: simulation and verification harness" };
  std::string task, config_path, out_dir;
  std::uint64_t seed = 0;
  std::size_t threads = 0;
  app.add_option("task", task, "simulate | estimate | benchmark-rate | posterior | verify-inversion | "
                               "verify-approx | lowerbound-family")
    ->required();
  app.add_option("--config", config_path, "JSON experiment config")->required()->check(CLI::ExistingFile);
  auto* seed_opt = app.add_option("--seed", seed, "override the master seed");
  auto* out_opt = app.add_option("--out", out_dir, "override the output directory");
  auto* threads_opt = app.add_option("--threads", threads, "override the worker count")->check(CLI::PositiveNumber);
  CLI11_PARSE(app, argc, argv);

  try {
    std::ifstream in(config_path);
    if (!in)
      throw wdeconv::IoError("cannot open " + config_path);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw wdeconv::ConfigError(std::string("invalid JSON: ") + e.what());
    }
    if (j.contains("task") && j["task"] != task)
      throw wdeconv::ConfigError("config task '" + j["task"].get<std::string>() + "' does not match '" + task + "'");
    j["task"] = task;
    if (*seed_opt)
      j["seed"] = seed;
    if (*out_opt)
      j["output_dir"] = out_dir;
    if (*threads_opt)
      j["threads"] = threads;
    const wdeconv::ExperimentConfig cfg = wdeconv::config_from_json(j);
    return wdeconv::run_task(cfg, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "deconv-w1: " << e.what() << "\n";
    return 1;
  }
}
