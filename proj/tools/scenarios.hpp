// Copyright 2026 The backflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "json.hpp"

namespace backflow::cli {

struct Table {
  std::string name;  // file stem
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct ScenarioOutput {
  std::vector<Table> tables;
  nlohmann::json summary;  // cusp reports, fitted values
  long flagged = 0;
};

// Expects a resolved, validated config. Library errors propagate.
ScenarioOutput run_scenario(const ExperimentConfig& c);

// Writes <out>/<name>.csv or .json; returns the path.
std::string write_table(const Table& t, const std::string& dir, const std::string& format);
// 17 significant digits, "%.17g".
std::string format_double(double x);

}  // namespace backflow::cli
