//
// Copyright 2026 The dpsketch Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dpsketch/commands.hpp"
#include "dpsketch/error.hpp"

namespace {

constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitError = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentially private regression sketches"};
  app.require_subcommand(1);

  dpsketch::SketchCommand sk;
  std::string delimiter = ",";
  bool no_header = false;
  std::string response;
  std::string clip = "scale";
  std::string calibration = "algorithm";
  std::string assignment = "bernoulli";
  std::optional<dpsketch::Index> nu;

  auto* sketch = app.add_subcommand("sketch", "Release a private sketch of a CSV dataset");
  sketch->add_option("--method", sk.method, "jl | cs2 | l1 | l1-illus")
      ->required()
      ->check(CLI::IsMember({"jl", "cs2", "l1", "l1-illus"}));
  sketch->add_option("--epsilon", sk.epsilon, "privacy parameter epsilon > 0")->required();
  sketch->add_option("--delta", sk.delta, "privacy parameter delta in (0,1)")->required();
  sketch->add_option("--bound", sk.bound, "l2 bound B on every row of [X, y]")->required();
  sketch->add_option("--rows", sk.rows, "sketch rows r (row budget for l1)")->required();
  sketch->add_option("--b", sk.branching, "l1: branching parameter b > 1");
  sketch->add_option("--s", sk.sparsity, "l1: level-0 sparsity s >= 1");
  sketch->add_option("--nu", nu, "l1: uniform-level buckets N_u (default N)");
  sketch->add_option("--seed", sk.seed, "seed; never written to the release")->required();
  sketch->add_option("--in", sk.input, "input CSV")->required();
  sketch->add_option("--out", sk.output, "output sketch file (.dps)")->required();
  sketch->add_option("--delimiter", delimiter, "CSV field delimiter");
  sketch->add_flag("--no-header", no_header, "CSV has no header row");
  sketch->add_option("--response", response, "response column name or zero-based index");
  sketch->add_option("--clip", clip, "rows above B: scale | reject")
      ->check(CLI::IsMember({"scale", "reject"}));
  sketch->add_option("--calibration", calibration, "l1 noise: algorithm | conservative | sqrt-levels")
      ->check(CLI::IsMember({"algorithm", "conservative", "sqrt-levels"}));
  sketch->add_option("--assignment", assignment, "l1 levels: bernoulli | categorical")
      ->check(CLI::IsMember({"bernoulli", "categorical"}));

  std::string solve_in;
  std::string norm;
  std::optional<std::string> json_out;
  auto* solve = app.add_subcommand("solve", "Solve the regression problem on a released sketch");
  solve->add_option("--norm", norm, "l1 | l2")->required()->check(CLI::IsMember({"l1", "l2"}));
  solve->add_option("--in", solve_in, "sketch file")->required();
  solve->add_option("--json", json_out, "write the solution as JSON");

  std::string suite;
  std::size_t trials = 10000;
  std::uint64_t verify_seed = 0;
  auto* verify = app.add_subcommand("verify", "Run a Monte Carlo verification suite");
  verify->add_option("--suite", suite,
                     "jl-distortion | cs-embedding | thm1 | lemma1 | lemma2 | thm2 | approx-ratio")
      ->required();
  verify->add_option("--trials", trials, "Monte Carlo trials (>= 100)");
  verify->add_option("--seed", verify_seed, "seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  try {
    if (*sketch) {
      if (delimiter.size() != 1) throw dpsketch::UsageError("--delimiter must be one character");
      sk.dataset.delimiter = delimiter[0];
      sk.dataset.has_header = !no_header;
      sk.dataset.clip = clip == "reject" ? dpsketch::ClipMode::reject : dpsketch::ClipMode::scale;
      if (!response.empty()) {
        if (response.find_first_not_of("0123456789") == std::string::npos) {
          sk.dataset.response_column = static_cast<std::size_t>(std::stoull(response));
        } else {
          sk.dataset.response_column = response;
        }
      }
      sk.uniform_buckets = nu;
      sk.calibration = calibration == "conservative"
                           ? dpsketch::L1NoiseCalibration::conservative_sensitivity
                       : calibration == "sqrt-levels"
                           ? dpsketch::L1NoiseCalibration::sqrt_levels_sensitivity
                           : dpsketch::L1NoiseCalibration::algorithm;
      sk.assignment = assignment == "categorical" ? dpsketch::LevelAssignment::categorical
                                                  : dpsketch::LevelAssignment::bernoulli;
      dpsketch::run_sketch(sk, std::cout);
      return 0;
    }
    if (*solve) {
      dpsketch::run_solve(solve_in, norm, json_out, std::cout);
      return 0;
    }
    const int code = dpsketch::run_verify(suite, trials, verify_seed, std::cout);
    return code == 0 ? 0 : kExitVerifyFailed;
  } catch (const dpsketch::UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const dpsketch::ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const dpsketch::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}
