// Copyright 2026 The backflow Authors
// SPDX-License-Identifier: Apache-2.0

// backflow-cli: run a named scenario and write data files plus a manifest.
// Exit codes: 0 success, 2 validation, 3 numeric, 4 capacity.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "backflow/common.hpp"
#include "config.hpp"
#include "scenarios.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 2;
constexpr int kNumeric = 3;
constexpr int kCapacity = 4;

}  // namespace

int main(int argc, char** argv) {
  using namespace backflow::cli;
  CLI::App app{"Dynamical phase transitions in open fermionic lattices"};
  std::string config_path, scenario, out, format;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads, n_cells, k_points, flux_samples, trajectories;
  std::optional<double> gamma_l, gamma_g, dt, t_max;
  app.add_option("--config", config_path, "YAML config file");
  app.add_option("--scenario", scenario, "scenario name")->check(CLI::IsMember(kScenarios));
  app.add_option("--seed", seed, "base seed for stochastic runs");
  app.add_option("--out", out, "output directory");
  app.add_option("--format", format, "csv or json");
  app.add_option("--threads", threads, "worker threads");
  app.add_option("--gamma-l", gamma_l, "loss strength");
  app.add_option("--gamma-g", gamma_g, "gain strength");
  app.add_option("--n-cells", n_cells, "unit cells for many_body_flux");
  app.add_option("--dt", dt, "time step");
  app.add_option("--t-max", t_max, "final time");
  app.add_option("--k-points", k_points, "momentum samples");
  app.add_option("--flux-samples", flux_samples, "flux samples");
  app.add_option("--trajectories", trajectories, "trajectories per flux sample");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  }

  ExperimentConfig cfg;
  try {
    if (!config_path.empty()) cfg = load_config(config_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  }
  if (!scenario.empty()) cfg.scenario = scenario;
  if (seed) cfg.seed = *seed;
  if (!out.empty()) cfg.out = out;
  if (!format.empty()) cfg.format = format;
  if (threads) cfg.threads = *threads;
  if (gamma_l) cfg.gamma_l = gamma_l;
  if (gamma_g) cfg.gamma_g = gamma_g;
  if (n_cells) cfg.n_cells = *n_cells;
  if (dt) cfg.dt = dt;
  if (t_max) cfg.t_max = t_max;
  if (k_points) cfg.k_points = k_points;
  if (flux_samples) cfg.flux_samples = *flux_samples;
  if (trajectories) cfg.trajectories = *trajectories;

  auto violations = validate(cfg);
  if (violations.empty()) {
    cfg = resolve(cfg);
    violations = validate(cfg);
  }
  if (!violations.empty()) {
    bool capacity = false;
    for (const auto& v : violations) {
      std::cerr << "invalid " << v.field << ": " << v.message << '\n';
      capacity = capacity || v.capacity;
    }
    return capacity ? kCapacity : kValidation;
  }

  const auto start = std::chrono::steady_clock::now();
  ScenarioOutput result;
  try {
    result = run_scenario(cfg);
  } catch (const backflow::CapacityError& e) {
    std::cerr << "capacity error in " << cfg.scenario << ": " << e.what() << '\n';
    return kCapacity;
  } catch (const backflow::DomainError& e) {
    std::cerr << "invalid input in " << cfg.scenario << ": " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure in " << cfg.scenario << ": " << e.what() << '\n';
    return kNumeric;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  try {
    std::filesystem::create_directories(cfg.out);
    nlohmann::json manifest;
    manifest["config"] = to_json(cfg);
    manifest["version"] = BACKFLOW_VERSION;
    manifest["seed"] = cfg.seed;
    manifest["wall_time_s"] = wall;
    manifest["flagged_samples"] = result.flagged;
    manifest["summary"] = result.summary;
    auto& files = manifest["files"] = nlohmann::json::array();
    for (const auto& t : result.tables) files.push_back(write_table(t, cfg.out, cfg.format));
    std::ofstream(std::filesystem::path(cfg.out) / "manifest.json") << manifest.dump(2) << '\n';
    std::cout << result.summary.dump() << '\n';
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kNumeric;
  }
  return kOk;
}
