// Copyright 2026 The backflow Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "catch_amalgamated.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
  const std::string cmd = std::string(BACKFLOW_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string capture_stderr(const std::string& args) {
  const fs::path tmp = fs::temp_directory_path() / "backflow_cli_stderr.txt";
  const std::string cmd = std::string(BACKFLOW_CLI_PATH) + " " + args + " >/dev/null 2>" + tmp.string();
  std::system(cmd.c_str());
  std::ifstream f(tmp);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("backflow_cli_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("validation failures exit with code 2 and name the field") {
  CHECK(run("--scenario two_band_rate") == 2);
  CHECK(capture_stderr("--scenario two_band_rate").find("γ_l required") != std::string::npos);
  CHECK(run("--scenario hk_rate --gamma-g -0.1") == 2);
  CHECK(capture_stderr("--scenario hk_rate --gamma-g -0.1").find("gain strength must be nonnegative") !=
        std::string::npos);
  CHECK(run("--scenario toy_cusp --dt 0") == 2);
  CHECK(run("--scenario nonsense") == 2);
}

TEST_CASE("too many cells is a capacity violation") {
  CHECK(run("--scenario many_body_flux --n-cells 12") == 4);
}

TEST_CASE("toy scenario writes a table and a manifest") {
  const auto out = scratch("toy");
  REQUIRE(run("--scenario toy_cusp --out " + out.string()) == 0);
  const auto csv = slurp(out / "toy.csv");
  CHECK(csv.rfind("tau,closed_form,quadrature\n", 0) == 0);
  const auto manifest = slurp(out / "manifest.json");
  for (const char* key : {"\"config\"", "\"version\"", "\"seed\"", "\"wall_time_s\"", "\"flagged_samples\""})
    CHECK(manifest.find(key) != std::string::npos);
}

TEST_CASE("identical config and seed give byte-identical data") {
  const auto a = scratch("rep_a"), b = scratch("rep_b");
  const std::string args = "--scenario many_body_flux --n-cells 2 --flux-samples 3 --trajectories 20 --t-max 0.5 "
                           "--seed 9 --threads 2 --out ";
  REQUIRE(run(args + a.string()) == 0);
  REQUIRE(run(args + b.string()) == 0);
  CHECK(slurp(a / "flux_rate.csv") == slurp(b / "flux_rate.csv"));
  CHECK(!slurp(a / "flux_rate.csv").empty());
}

TEST_CASE("config file values are overridden by flags") {
  const auto out = scratch("cfg");
  fs::create_directories(out);
  {
    std::ofstream f(out / "run.yaml");
    f << "scenario: two_band_rate\nmodel:\n  gamma_l: 0.2\n  gamma_g: 0.01\ngrid:\n  k_points: 8\n  t_max: 1.0\n";
  }
  REQUIRE(run("--config " + (out / "run.yaml").string() + " --t-max 0.5 --out " + out.string()) == 0);
  const auto csv = slurp(out / "rate.csv");
  CHECK(csv.find("\n0.5,") != std::string::npos);
  CHECK(csv.find("\n0.51000000000000001,") == std::string::npos);
  CHECK(csv.find("G@gamma_g=0.01") != std::string::npos);
}

TEST_CASE("json output") {
  const auto out = scratch("json");
  REQUIRE(run("--scenario liouvillian_spectrum --gamma-l 0.2 --format json --out " + out.string()) == 0);
  const auto js = slurp(out / "spectrum.json");
  CHECK(js.find("\"columns\"") != std::string::npos);
}
