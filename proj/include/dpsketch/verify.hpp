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

// Named Monte Carlo suites behind `dpsketch verify`. Each suite fixes its
// problem sizes; `trials` is the number of Monte Carlo repetitions (noise
// draws for the tail-bound suites, sketch seeds for the others).

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dpsketch/bounds.hpp"
#include "dpsketch/countsketch.hpp"
#include "dpsketch/error.hpp"
#include "dpsketch/jl_sketch.hpp"
#include "dpsketch/l1_sketch.hpp"
#include "dpsketch/linalg.hpp"
#include "dpsketch/mechanisms.hpp"
#include "dpsketch/parallel.hpp"
#include "dpsketch/solvers.hpp"
#include "dpsketch/synthetic.hpp"

namespace dpsketch {

struct SuiteResult {
  std::string suite;
  std::vector<BoundReport> reports;
  // Headline statistic (median ratio, in-band fraction, ...) when the suite
  // has one.
  std::string metric_name;
  double metric = 0.0;

  bool passed() const {
    return std::all_of(reports.begin(), reports.end(),
                       [](const BoundReport& r) { return r.informational || r.passed; });
  }
};

inline constexpr double kConstantProbability = 0.25;

// Fixed unit direction in R^(d+1) with equal-magnitude entries.
inline Vector unit_beta_aug(Index features) {
  Vector v = Vector::Ones(features + 1);
  v(features) = -1.0;
  return v / v.norm();
}

// Noise-row counts checked by the tail suites.
struct NoiseRowVariant {
  const char* label;
  Index (*count)(Index);
};

inline constexpr NoiseRowVariant kNoiseRowVariants[] = {
    {"p=ceil(r ln r)", &log_noise_rows},
    {"p=ceil(r(ln r+4))", &noise_row_count},
};

namespace detail {

inline std::string describe(const std::string& base, Index r, const char* extra) {
  return base + " r=" + std::to_string(r) + " " + extra;
}

inline double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + mid);
  return 0.5 * (lo + hi);
}

}  // namespace detail

// Pr(sum |u_i| >= r sigma) <= 1/4 for u_i ~ N(0, sigma^2).
inline SuiteResult suite_lemma1(std::size_t trials, std::uint64_t seed) {
  SuiteResult out{"lemma1", {}, "", 0.0};
  const std::pair<Index, double> cases[] = {{10, 1.0}, {50, 1.0}, {50, 3.0}};
  std::uint64_t stream = 0;
  for (const auto& [r, sigma] : cases) {
    out.reports.push_back(verify_tail_bound(
        IidGaussianSampler{r, sigma}, TailStatistic::l1_norm, l1_tail_bound(r, sigma),
        kConstantProbability, trials, derive_seed(seed, stream++),
        "l1-tail r=" + std::to_string(r) + " sigma=" + std::to_string(sigma)));
  }
  return out;
}

struct TailSuiteParams {
  double bound = 1.0;
  double epsilon = 1.0;
  double delta = 0.05;
  Index features = 5;
  std::vector<Index> sketch_rows = {16, 64};
  std::size_t levels = 4;  // h_m for the multi-level bound
};

// ||eta beta_aug||_2 against the ridge-coefficient bound.
inline SuiteResult suite_thm1(std::size_t trials, std::uint64_t seed,
                              const TailSuiteParams& prm = {}) {
  SuiteResult out{"thm1", {}, "", 0.0};
  const RowBound b(prm.bound);
  const PrivacyParams pp(prm.epsilon, prm.delta);
  const Vector beta = unit_beta_aug(prm.features);
  const double sigma = gaussian_sigma(countsketch_sensitivity(b), pp);
  std::uint64_t stream = 0;
  for (Index r : prm.sketch_rows) {
    const double bound = ridge_coeff_bound_l2(b, pp, r, beta);
    for (const auto& variant : kNoiseRowVariants) {
      out.reports.push_back(verify_tail_bound(
          GaussianProjectionSampler{variant.count(r), sigma, beta}, TailStatistic::l2_norm,
          bound, kConstantProbability, trials, derive_seed(seed, stream++),
          detail::describe("ridge-l2", r, variant.label)));
    }
  }
  return out;
}

// ||eta beta_aug||_1 against the single-level l1 bound.
inline SuiteResult suite_lemma2(std::size_t trials, std::uint64_t seed,
                                const TailSuiteParams& prm = {}) {
  SuiteResult out{"lemma2", {}, "", 0.0};
  const RowBound b(prm.bound);
  const PrivacyParams pp(prm.epsilon, prm.delta);
  const Vector beta = unit_beta_aug(prm.features);
  const double sigma = gaussian_sigma(2.0 * b.value(), pp);
  std::uint64_t stream = 0;
  for (Index r : prm.sketch_rows) {
    const double bound = l1_coeff_bound_simple(b, pp, r, beta);
    for (const auto& variant : kNoiseRowVariants) {
      out.reports.push_back(verify_tail_bound(
          GaussianProjectionSampler{variant.count(r), sigma, beta}, TailStatistic::l1_norm,
          bound, kConstantProbability, trials, derive_seed(seed, stream++),
          detail::describe("l1-simple", r, variant.label)));
    }
  }
  // Axis-aligned beta_aug at the implemented p, reported only.
  Vector axis = Vector::Zero(prm.features + 1);
  axis(prm.features) = -1.0;
  const Index r = prm.sketch_rows.front();
  BoundReport axis_report = verify_tail_bound(
      GaussianProjectionSampler{noise_row_count(r), sigma, axis}, TailStatistic::l1_norm,
      l1_coeff_bound_simple(b, pp, r, axis), kConstantProbability, trials,
      derive_seed(seed, stream++), detail::describe("l1-simple axis-beta", r, kNoiseRowVariants[1].label));
  axis_report.informational = true;
  out.reports.push_back(axis_report);
  return out;
}

// Multi-level l1 bound, noise calibrated at sensitivity 2B sqrt(h_m).
inline SuiteResult suite_thm2(std::size_t trials, std::uint64_t seed,
                              const TailSuiteParams& prm = {}) {
  SuiteResult out{"thm2", {}, "", 0.0};
  const RowBound b(prm.bound);
  const PrivacyParams pp(prm.epsilon, prm.delta);
  const Vector beta = unit_beta_aug(prm.features);
  const double sigma = gaussian_sigma(
      l1_sketch_sensitivity(b, prm.levels, 1, SensitivityMode::sqrt_levels), pp);
  std::uint64_t stream = 0;
  const std::string hm = "h_m=" + std::to_string(prm.levels);
  for (Index r : prm.sketch_rows) {
    const double bound = l1_coeff_bound_multilevel(b, pp, r, prm.levels, beta);
    for (const auto& variant : kNoiseRowVariants) {
      out.reports.push_back(verify_tail_bound(
          GaussianProjectionSampler{variant.count(r), sigma, beta}, TailStatistic::l1_norm,
          bound, kConstantProbability, trials, derive_seed(seed, stream++),
          detail::describe("l1-multilevel " + hm, r, variant.label)));
    }
  }
  // Release-default sigma (proportional to h_m), reported only.
  const Index r = prm.sketch_rows.front();
  const double algorithm_sigma =
      gaussian_sigma(2.0 * b.value() * static_cast<double>(prm.levels), pp);
  BoundReport alg = verify_tail_bound(
      GaussianProjectionSampler{log_noise_rows(r), algorithm_sigma, beta},
      TailStatistic::l1_norm, l1_coeff_bound_multilevel(b, pp, r, prm.levels, beta),
      kConstantProbability, trials, derive_seed(seed, stream++),
      detail::describe("l1-multilevel " + hm + " sigma~h_m", r, kNoiseRowVariants[0].label));
  alg.informational = true;
  out.reports.push_back(alg);
  return out;
}

struct DistortionParams {
  Index sketch_rows = 1000;
  Index dimension = 200;
  Index vectors = 20;
  double max_distortion = 0.35;
  double min_fraction = 0.95;
};

// Per-(seed, vector) scaled squared-norm ratios ||S v||^2 / (r ||v||^2).
inline std::vector<double> jl_distortion_ratios(std::size_t seeds, std::uint64_t seed,
                                                const DistortionParams& prm = {}) {
  Matrix v = sample_gaussian_matrix(prm.dimension, prm.vectors, 1.0, derive_seed(seed, 0));
  v.colwise().normalize();
  std::vector<double> ratios(seeds * static_cast<std::size_t>(prm.vectors));
  parallel_for(seeds, [&](std::size_t t) {
    const Matrix sv = gaussian_sketch(v, prm.sketch_rows, derive_seed(seed, 1 + t));
    for (Index j = 0; j < prm.vectors; ++j) {
      ratios[t * static_cast<std::size_t>(prm.vectors) + static_cast<std::size_t>(j)] =
          sv.col(j).squaredNorm() / static_cast<double>(prm.sketch_rows);
    }
  });
  return ratios;
}

inline SuiteResult suite_jl_distortion(std::size_t trials, std::uint64_t seed,
                                       const DistortionParams& prm = {}) {
  if (trials < kMinTrials) throw ParameterError("jl-distortion: at least 100 trials required");
  const auto ratios = jl_distortion_ratios(trials, seed, prm);
  const auto outside = static_cast<std::size_t>(
      std::count_if(ratios.begin(), ratios.end(),
                    [&](double q) { return std::abs(q - 1.0) > prm.max_distortion; }));
  SuiteResult out{"jl-distortion", {}, "fraction within 1 +/- mu", 0.0};
  out.metric = 1.0 - static_cast<double>(outside) / static_cast<double>(ratios.size());
  out.reports.push_back(make_report("jl-distortion mu=" + std::to_string(prm.max_distortion),
                                    prm.max_distortion, ratios.size(), outside,
                                    1.0 - prm.min_fraction));
  return out;
}

struct EmbeddingParams {
  Index n = 5000;
  Index d = 5;
  Index sketch_rows = 2500;
  Index directions = 100;
  double low = 0.5;
  double high = 1.5;
  double min_fraction = 0.90;
};

// ||S A v|| / ||A v|| for a signed CountSketch S, per (seed, direction).
inline std::vector<double> cs_embedding_ratios(std::size_t seeds, std::uint64_t seed,
                                               const EmbeddingParams& prm = {}) {
  const Matrix a = sample_gaussian_matrix(prm.n, prm.d, 1.0, derive_seed(seed, 0));
  std::vector<double> ratios(seeds * static_cast<std::size_t>(prm.directions));
  parallel_for(seeds, [&](std::size_t t) {
    Rng rng(derive_seed(seed, 1 + t));
    const CountSketchPlan plan = draw_countsketch_plan(prm.sketch_rows, prm.n, rng);
    const Matrix sa = countsketch_apply(plan, a);
    for (Index k = 0; k < prm.directions; ++k) {
      Vector v(prm.d);
      for (Index j = 0; j < prm.d; ++j) v(j) = rng.gaussian();
      ratios[t * static_cast<std::size_t>(prm.directions) + static_cast<std::size_t>(k)] =
          (sa * v).norm() / (a * v).norm();
    }
  });
  return ratios;
}

inline SuiteResult suite_cs_embedding(std::size_t trials, std::uint64_t seed,
                                      const EmbeddingParams& prm = {}) {
  if (trials < kMinTrials) throw ParameterError("cs-embedding: at least 100 trials required");
  const auto ratios = cs_embedding_ratios(trials, seed, prm);
  const auto outside = static_cast<std::size_t>(std::count_if(
      ratios.begin(), ratios.end(), [&](double q) { return q < prm.low || q > prm.high; }));
  SuiteResult out{"cs-embedding", {}, "fraction within [0.5, 1.5]", 0.0};
  out.metric = 1.0 - static_cast<double>(outside) / static_cast<double>(ratios.size());
  out.reports.push_back(make_report("cs-embedding r=" + std::to_string(prm.sketch_rows), prm.high,
                                    ratios.size(), outside, 1.0 - prm.min_fraction));
  return out;
}

struct RatioParams {
  Index n = 5000;
  Index d = 5;
  double noise = 0.5;
  double ceiling = 1.5;
};

// Non-private JL sketch-and-solve, r = ceil(50 d ln d).
inline Index approx_ratio_rows(Index d) {
  const double dd = static_cast<double>(d);
  return static_cast<Index>(std::ceil(50.0 * dd * std::log(dd)));
}

inline std::vector<double> jl_approximation_ratios(std::size_t seeds, std::uint64_t seed,
                                                   const RatioParams& prm = {}) {
  const SyntheticRegression inst =
      make_synthetic_regression(prm.n, prm.d, prm.noise, derive_seed(seed, 0));
  const Index r = approx_ratio_rows(prm.d);
  const double optimal =
      regression_loss(inst.data.matrix(), exact_solution(inst.data, Norm::l2).beta_aug, Norm::l2);
  std::vector<double> ratios(seeds);
  parallel_for(seeds, [&](std::size_t t) {
    const Matrix sketch = gaussian_sketch(inst.data.matrix(), r, derive_seed(seed, 1 + t));
    const RegressionSolution sol = solve_l2_sketch(SketchProblem{sketch, std::nullopt});
    ratios[t] = regression_loss(inst.data.matrix(), sol.beta_aug, Norm::l2) / optimal;
  });
  return ratios;
}

inline SuiteResult suite_approx_ratio(std::size_t trials, std::uint64_t seed,
                                      const RatioParams& prm = {}) {
  if (trials < kMinTrials) throw ParameterError("approx-ratio: at least 100 trials required");
  const auto ratios = jl_approximation_ratios(trials, seed, prm);
  const auto above = static_cast<std::size_t>(std::count_if(
      ratios.begin(), ratios.end(), [&](double q) { return q > prm.ceiling; }));
  SuiteResult out{"approx-ratio", {}, "median ratio", detail::median(ratios)};
  BoundReport rep = make_report("jl-approx-ratio r=" + std::to_string(approx_ratio_rows(prm.d)),
                                prm.ceiling, ratios.size(), above, 0.5);
  // A median test: strictly fewer than half the ratios may exceed the ceiling.
  rep.passed = out.metric <= prm.ceiling;
  out.reports.push_back(rep);
  return out;
}

inline const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names = {"jl-distortion", "cs-embedding", "thm1",
                                                 "lemma1",        "lemma2",       "thm2",
                                                 "approx-ratio"};
  return names;
}

inline SuiteResult run_suite(const std::string& name, std::size_t trials, std::uint64_t seed) {
  if (trials < kMinTrials) {
    throw UsageError("verify: at least " + std::to_string(kMinTrials) + " trials are required");
  }
  if (name == "jl-distortion") return suite_jl_distortion(trials, seed);
  if (name == "cs-embedding") return suite_cs_embedding(trials, seed);
  if (name == "thm1") return suite_thm1(trials, seed);
  if (name == "lemma1") return suite_lemma1(trials, seed);
  if (name == "lemma2") return suite_lemma2(trials, seed);
  if (name == "thm2") return suite_thm2(trials, seed);
  if (name == "approx-ratio") return suite_approx_ratio(trials, seed);
  throw UsageError("verify: unknown suite '" + name + "'");
}

}  // namespace dpsketch
