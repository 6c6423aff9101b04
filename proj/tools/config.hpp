// Copyright 2026 The backflow Authors
// SPDX-License-Identifier: Apache-2.0

// Experiment configuration: a YAML file plus command-line overrides.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace backflow::cli {

inline const std::vector<std::string> kScenarios = {
    "two_band_rate", "two_band_crossover", "liouvillian_spectrum", "backflow_check",
    "hk_fisher",     "hk_rate",            "many_body_flux",       "toy_cusp"};

struct ExperimentConfig {
  std::string scenario;
  // model
  double t0 = 0.5;
  double t1 = 1.5;
  double w = 1.0;
  std::optional<double> gamma_l;
  std::optional<double> gamma_g;
  std::vector<double> gains;  // crossover sweep
  double U = 80.0;
  int n_cells = 7;
  double k0 = 1.0;
  double delta = 1.0;
  // grids
  std::optional<int> k_points;
  double t_min = 0.0;
  std::optional<double> t_max;
  std::optional<double> dt;
  int flux_samples = 750;
  int n_min = -1;
  int n_max = 4;
  // engines and sampling
  std::string engine = "both";  // many_body_flux: nonhermitian | mcwf | both
  int trajectories = 1000;
  std::uint64_t seed = 1;
  // output
  std::string out = "out";
  std::string format = "csv";
  int threads = 1;
};

struct Violation {
  std::string field;
  std::string message;
  bool capacity = false;
};

// Throws std::runtime_error with the offending key on malformed files.
ExperimentConfig load_config(const std::string& path);
// Fill scenario-dependent defaults (grids, gain strengths).
ExperimentConfig resolve(ExperimentConfig c);
// Never throws; empty iff runnable.
std::vector<Violation> validate(const ExperimentConfig& c);
nlohmann::json to_json(const ExperimentConfig& c);

}  // namespace backflow::cli
