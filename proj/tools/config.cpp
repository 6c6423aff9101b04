// Copyright 2026 The backflow Authors
// SPDX-License-Identifier: Apache-2.0

#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <yaml-cpp/yaml.h>

#include "backflow/models.hpp"

namespace backflow::cli {

namespace {

template <class T>
void read(const YAML::Node& node, const char* key, T& out) {
  if (!node[key]) return;
  try {
    out = node[key].as<T>();
  } catch (const YAML::Exception&) {
    throw std::runtime_error(std::string("config: field '") + key + "' has the wrong type");
  }
}

template <class T>
void read(const YAML::Node& node, const char* key, std::optional<T>& out) {
  if (!node[key] || node[key].IsNull()) return;
  T v{};
  read(node, key, v);
  out = v;
}

bool two_band(const std::string& s) {
  return s == "two_band_rate" || s == "two_band_crossover" || s == "liouvillian_spectrum" || s == "backflow_check";
}

}  // namespace

ExperimentConfig load_config(const std::string& path) {
  YAML::Node root;
  try {
    root = YAML::LoadFile(path);
  } catch (const YAML::Exception& e) {
    throw std::runtime_error("config: cannot read " + path + ": " + e.what());
  }
  ExperimentConfig c;
  read(root, "scenario", c.scenario);
  const YAML::Node model = root["model"] ? root["model"] : root;
  read(model, "t0", c.t0);
  read(model, "t1", c.t1);
  read(model, "w", c.w);
  read(model, "gamma_l", c.gamma_l);
  read(model, "gamma_g", c.gamma_g);
  read(model, "gains", c.gains);
  read(model, "U", c.U);
  read(model, "n_cells", c.n_cells);
  read(model, "k0", c.k0);
  read(model, "delta", c.delta);
  const YAML::Node grid = root["grid"] ? root["grid"] : root;
  read(grid, "k_points", c.k_points);
  read(grid, "t_min", c.t_min);
  read(grid, "t_max", c.t_max);
  read(grid, "dt", c.dt);
  read(grid, "flux_samples", c.flux_samples);
  read(grid, "n_min", c.n_min);
  read(grid, "n_max", c.n_max);
  const YAML::Node run = root["run"] ? root["run"] : root;
  read(run, "engine", c.engine);
  read(run, "trajectories", c.trajectories);
  read(run, "seed", c.seed);
  read(run, "threads", c.threads);
  const YAML::Node output = root["output"] ? root["output"] : root;
  read(output, "out", c.out);
  read(output, "format", c.format);
  return c;
}

ExperimentConfig resolve(ExperimentConfig c) {
  const std::string& s = c.scenario;
  auto set = [](auto& opt, auto v) {
    if (!opt) opt = v;
  };
  if (s == "two_band_rate") {
    set(c.gamma_g, 0.01);
    set(c.k_points, 400);
    set(c.t_max, 4.0);
    set(c.dt, 0.01);
  } else if (s == "two_band_crossover") {
    if (c.gains.empty()) c.gains = c.gamma_g ? std::vector<double>{*c.gamma_g} : std::vector<double>{1e-2, 1e-3, 1e-4, 1e-5};
    set(c.t_max, 200.0);
    set(c.dt, 0.01);
  } else if (s == "liouvillian_spectrum") {
    set(c.gamma_g, 0.0);
  } else if (s == "backflow_check") {
    set(c.gamma_g, 0.01);
    set(c.t_max, 5.0);
    set(c.dt, 0.5);
  } else if (s == "hk_fisher") {
    set(c.gamma_g, 0.5);
    set(c.k_points, 400);
    set(c.t_max, 8.0);
  } else if (s == "hk_rate") {
    set(c.gamma_l, 0.0);
    set(c.gamma_g, 0.5);
    set(c.k_points, 1000);
    set(c.t_max, 8.0);
    set(c.dt, 0.01);
  } else if (s == "many_body_flux") {
    set(c.gamma_l, 0.4);
    set(c.gamma_g, *c.gamma_l / 100.0);
    set(c.t_max, 5.0);
    set(c.dt, 0.005);
  } else if (s == "toy_cusp") {
    set(c.t_max, 1.0);
    set(c.dt, 0.01);
  }
  return c;
}

std::vector<Violation> validate(const ExperimentConfig& c) {
  std::vector<Violation> v;
  if (std::find(kScenarios.begin(), kScenarios.end(), c.scenario) == kScenarios.end())
    v.push_back({"scenario", "unknown scenario '" + c.scenario + "'"});
  if (c.gamma_l && !(*c.gamma_l >= 0.0)) v.push_back({"gamma_l", "loss strength must be nonnegative"});
  if (c.gamma_g && !(*c.gamma_g >= 0.0)) v.push_back({"gamma_g", "gain strength must be nonnegative"});
  for (double g : c.gains)
    if (!(g > 0.0)) v.push_back({"gains", "crossover gain strengths must be positive"});
  if (two_band(c.scenario) && !c.gamma_l)
    v.push_back({"gamma_l", "γ_l required: two-band scenarios have no default loss strength"});
  if (!(c.U >= 0.0)) v.push_back({"U", "interaction strength must be nonnegative"});
  if (!(c.w > 0.0)) v.push_back({"w", "hopping w must be positive"});
  if (c.n_cells < 1) v.push_back({"n_cells", "must be at least 1"});
  if (c.n_cells > kMaxCells)
    v.push_back({"n_cells", "capacity exceeded: at most " + std::to_string(kMaxCells) + " cells", true});
  if (c.k_points && *c.k_points < 1) v.push_back({"k_points", "grid must be nonempty"});
  if (c.dt && !(*c.dt > 0.0)) v.push_back({"dt", "time step must be positive"});
  if (c.t_max && !(*c.t_max > c.t_min)) v.push_back({"t_max", "must exceed t_min"});
  if (c.flux_samples < 1) v.push_back({"flux_samples", "grid must be nonempty"});
  if (c.n_max < c.n_min) v.push_back({"n_max", "must be at least n_min"});
  if (c.trajectories < 1) v.push_back({"trajectories", "must be at least 1"});
  if (c.threads < 1) v.push_back({"threads", "must be at least 1"});
  if (!(c.delta > 0.0)) v.push_back({"delta", "cutoff must be positive"});
  if (c.engine != "nonhermitian" && c.engine != "mcwf" && c.engine != "both")
    v.push_back({"engine", "must be nonhermitian, mcwf or both"});
  if (c.format != "csv" && c.format != "json") v.push_back({"format", "must be csv or json"});
  return v;
}

nlohmann::json to_json(const ExperimentConfig& c) {
  nlohmann::json j;
  auto opt = [](const auto& o) -> nlohmann::json { return o ? nlohmann::json(*o) : nlohmann::json(nullptr); };
  j["scenario"] = c.scenario;
  j["model"] = {{"t0", c.t0},           {"t1", c.t1},       {"w", c.w},           {"gamma_l", opt(c.gamma_l)},
                {"gamma_g", opt(c.gamma_g)}, {"gains", c.gains}, {"U", c.U},           {"n_cells", c.n_cells},
                {"k0", c.k0},           {"delta", c.delta}};
  j["grid"] = {{"k_points", opt(c.k_points)}, {"t_min", c.t_min},       {"t_max", opt(c.t_max)},
               {"dt", opt(c.dt)},             {"flux_samples", c.flux_samples}, {"n_min", c.n_min},
               {"n_max", c.n_max}};
  j["run"] = {{"engine", c.engine}, {"trajectories", c.trajectories}, {"seed", c.seed}, {"threads", c.threads}};
  j["output"] = {{"out", c.out}, {"format", c.format}};
  return j;
}

}  // namespace backflow::cli
