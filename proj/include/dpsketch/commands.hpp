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
#pragma once

// The sketch / solve / verify commands, independent of argument parsing so
// they can be driven from tests.
//
// The seed given to `sketch` makes experiments reproducible. It is never
// written to the release; anyone holding it can regenerate S and undo the
// privacy guarantee.

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <string>

#include <json.hpp>

#include "dpsketch/bounds.hpp"
#include "dpsketch/countsketch.hpp"
#include "dpsketch/error.hpp"
#include "dpsketch/io.hpp"
#include "dpsketch/jl_sketch.hpp"
#include "dpsketch/l1_sketch.hpp"
#include "dpsketch/solvers.hpp"
#include "dpsketch/verify.hpp"

namespace dpsketch {

struct SketchCommand {
  std::string method;  // jl | cs2 | l1 | l1-illus
  double epsilon = 1.0;
  double delta = 1e-5;
  double bound = 1.0;
  Index rows = 0;
  double branching = 2.0;
  Index sparsity = 1;
  std::optional<Index> uniform_buckets;
  std::uint64_t seed = 0;
  std::string input;
  std::string output;
  DatasetOptions dataset;
  L1NoiseCalibration calibration = L1NoiseCalibration::algorithm;
  LevelAssignment assignment = LevelAssignment::bernoulli;
};

inline SketchMethod parse_cli_method(const std::string& m) {
  if (m == "jl") return SketchMethod::jl;
  if (m == "cs2") return SketchMethod::countsketch_l2;
  if (m == "l1") return SketchMethod::l1_multilevel;
  if (m == "l1-illus") return SketchMethod::l1_illustration;
  throw UsageError("unknown sketch method '" + m + "' (expected jl, cs2, l1 or l1-illus)");
}

// Builds the release for already-ingested data; `log` receives the summary.
inline SketchFile make_release(const DataMatrix& data, const SketchCommand& cmd,
                               std::ostream& log) {
  const SketchMethod method = parse_cli_method(cmd.method);
  const PrivacyParams pp(cmd.epsilon, cmd.delta);
  const RowBound bound(cmd.bound);
  if (cmd.rows < 1) throw UsageError("--rows must be >= 1");

  SketchFile file;
  file.method = method;
  file.epsilon = pp.epsilon();
  file.delta = pp.delta();
  file.bound = bound.value();
  const Vector unit = unit_beta_aug(data.features());

  log << std::setprecision(6);
  log << "method        " << to_string(method) << "\n";
  log << "input rows    " << data.rows() << "\n";
  log << "features d    " << data.features() << "\n";

  switch (method) {
    case SketchMethod::jl: {
      const JlRelease rel = private_jl_sketch(data, JlConfig{cmd.rows, pp, bound, cmd.seed});
      file.sketch = rel.sketch;
      file.metadata = {{"branch", to_string(rel.meta.branch)},
                       {"w_squared", rel.meta.w_squared},
                       {"c", rel.meta.c},
                       {"utility_factor", rel.meta.utility_factor()},
                       {"utility_warning", rel.meta.utility_warning}};
      log << "branch        " << to_string(rel.meta.branch) << "\n";
      log << "w^2           " << rel.meta.w_squared << "\n";
      log << "c             " << rel.meta.c << "\n";
      log << "noise sigma   0 (projection only)\n";
      log << "advisory      ridge coefficient w^2 = " << rel.meta.w_squared
          << "; spectral-augment utility factor 1+c^2 = " << rel.meta.utility_factor() << "\n";
      if (rel.meta.utility_warning) {
        log << "warning       1+c^2 exceeds " << kAugmentWarningFactor
            << ": sketched loss is inflated by that factor\n";
      }
      break;
    }
    case SketchMethod::countsketch_l2:
    case SketchMethod::l1_illustration: {
      const bool l2 = method == SketchMethod::countsketch_l2;
      const CountSketchRelease rel =
          l2 ? private_countsketch_l2(data, cmd.rows, pp, bound, cmd.seed)
             : illustration_sketch_private(data, cmd.rows, pp, bound, cmd.seed);
      file.sketch = rel.sketch;
      file.metadata = {{"noise_sigma", rel.noise.sigma}, {"noise_rows", rel.noise.noise_rows}};
      log << "noise sigma   " << rel.noise.sigma << "\n";
      log << "noise rows p  " << rel.noise.noise_rows << " (+" << rel.noise.patched_rows
          << " coverage patches)\n";
      if (cmd.rows >= 2) {
        const double adv = l2 ? ridge_coeff_bound_l2(bound, pp, cmd.rows, unit)
                              : l1_coeff_bound_simple(bound, pp, cmd.rows, unit);
        log << "advisory      regularisation bound at ||beta_aug||=1: " << adv << "\n";
      }
      break;
    }
    case SketchMethod::l1_multilevel: {
      const L1Layout layout =
          l1_layout_for_budget(cmd.rows, static_cast<std::size_t>(data.rows()), cmd.branching,
                               cmd.sparsity, cmd.uniform_buckets);
      L1SketchConfig cfg{cmd.branching, layout.buckets, cmd.sparsity, layout.uniform_buckets,
                         pp, bound, cmd.seed, cmd.calibration, cmd.assignment, std::nullopt};
      const WeightedSketch ws = private_l1_sketch(data, cfg);
      file.sketch = ws.rows;
      file.weights = ws.weights;
      file.metadata = {{"branching", cmd.branching},
                       {"sparsity", cmd.sparsity},
                       {"buckets", layout.buckets},
                       {"uniform_buckets", layout.uniform_buckets},
                       {"levels", ws.levels},
                       {"noise_sigma", ws.sigma},
                       {"noise_rows", ws.noise_rows},
                       {"calibration", to_string(cmd.calibration)},
                       {"assignment", cmd.assignment == LevelAssignment::bernoulli
                                          ? "bernoulli"
                                          : "categorical"}};
      log << "levels h_m    " << ws.levels << "\n";
      log << "layout        N=" << layout.buckets << " N_u=" << layout.uniform_buckets
          << " r=" << ws.rows.rows() << "\n";
      log << "occupancy    ";
      for (std::size_t h = 0; h <= ws.levels; ++h) log << " " << ws.data_rows_per_level[h];
      log << "\n";
      log << "noise sigma   " << ws.sigma << " (" << to_string(cmd.calibration) << ")\n";
      log << "noise rows p  " << ws.noise_rows << " (+" << ws.patched_rows
          << " coverage patches)\n";
      if (ws.rows.rows() >= 2) {
        log << "advisory      regularisation bound at ||beta_aug||=1: "
            << l1_coeff_bound_multilevel(bound, pp, ws.rows.rows(), ws.levels, unit) << "\n";
      }
      break;
    }
  }
  log << "sketch rows   " << file.sketch.rows() << "\n";
  return file;
}

inline SketchFile run_sketch(const SketchCommand& cmd, std::ostream& log) {
  const RowBound bound(cmd.bound);
  IngestResult in = ingest_file(cmd.input, bound, cmd.dataset);
  if (in.clipped_rows > 0) {
    log << "warning       " << in.clipped_rows << " row(s) rescaled to norm B = " << cmd.bound
        << "\n";
  }
  SketchFile file = make_release(in.data, cmd, log);
  write_sketch_file(cmd.output, file);
  log << "wrote         " << cmd.output << "\n";
  return file;
}

inline Norm parse_norm(const std::string& name) {
  if (name == "l1") return Norm::l1;
  if (name == "l2") return Norm::l2;
  throw UsageError("unknown norm '" + name + "' (expected l1 or l2)");
}

inline RegressionSolution solve_release(const SketchFile& file, Norm norm) {
  const bool l2_method =
      file.method == SketchMethod::jl || file.method == SketchMethod::countsketch_l2;
  if (l2_method != (norm == Norm::l2)) {
    throw UsageError(std::string("norm ") + to_string(norm) + " is not compatible with a " +
                     to_string(file.method) + " sketch");
  }
  SketchProblem problem{file.sketch, file.weights};
  return norm == Norm::l2 ? solve_l2_sketch(problem) : solve_l1_weighted(problem);
}

inline nlohmann::json to_json(const RegressionSolution& sol) {
  return {{"beta", std::vector<double>(sol.beta.data(), sol.beta.data() + sol.beta.size())},
          {"beta_aug",
           std::vector<double>(sol.beta_aug.data(), sol.beta_aug.data() + sol.beta_aug.size())},
          {"sketch_loss", sol.sketch_loss},
          {"method", to_string(sol.method)},
          {"converged", sol.converged},
          {"iterations", sol.iterations}};
}

inline RegressionSolution run_solve(const std::string& input, const std::string& norm_name,
                                    const std::optional<std::string>& json_out,
                                    std::ostream& log) {
  const Norm norm = parse_norm(norm_name);
  const SketchFile file = read_sketch_file(input);
  const RegressionSolution sol = solve_release(file, norm);
  log << std::setprecision(10);
  log << "sketch        " << to_string(file.method) << " r=" << file.rows()
      << " d=" << file.features() << (file.weights ? " (weighted)" : "") << "\n";
  log << "solver        " << to_string(sol.method);
  if (sol.method == SolveMethod::irls) {
    log << " iterations=" << sol.iterations << (sol.converged ? " converged" : " NOT converged");
  }
  log << "\n";
  log << "beta         ";
  for (Index j = 0; j < sol.beta.size(); ++j) log << " " << sol.beta(j);
  log << "\n";
  log << "sketch loss   " << sol.sketch_loss << "\n";
  if (json_out) {
    nlohmann::json j = to_json(sol);
    j["norm"] = to_string(norm);
    j["sketch_method"] = to_string(file.method);
    std::ofstream out(*json_out);
    if (!out) throw IoError("cannot open '" + *json_out + "' for writing");
    out << j.dump(2) << "\n";
  }
  return sol;
}

inline void print_report(const BoundReport& r, std::ostream& out) {
  out << (r.informational ? "[info] " : (r.passed ? "[pass] " : "[FAIL] ")) << r.bound_name
      << "  bound=" << r.analytic_value << "  exceed=" << r.exceedances << "/" << r.trials
      << " (" << r.exceedance_rate() << ")  threshold=" << r.threshold_prob << "\n";
}

// Returns the process exit code: 0 iff every non-informational report passes.
inline int run_verify(const std::string& suite, std::size_t trials, std::uint64_t seed,
                      std::ostream& out) {
  const SuiteResult res = run_suite(suite, trials, seed);
  out << std::setprecision(6);
  out << "suite " << res.suite << "  trials=" << trials << "  seed=" << seed << "\n";
  for (const auto& r : res.reports) print_report(r, out);
  if (!res.metric_name.empty()) out << res.metric_name << " = " << res.metric << "\n";
  out << (res.passed() ? "PASS" : "FAIL") << "\n";
  return res.passed() ? 0 : 1;
}

}  // namespace dpsketch
