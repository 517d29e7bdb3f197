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
// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit when any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "dpsketch/bounds.hpp"
#include "dpsketch/commands.hpp"
#include "dpsketch/countsketch.hpp"
#include "dpsketch/io.hpp"
#include "dpsketch/jl_sketch.hpp"
#include "dpsketch/l1_sketch.hpp"
#include "dpsketch/linalg.hpp"
#include "dpsketch/mechanisms.hpp"
#include "dpsketch/solvers.hpp"
#include "dpsketch/synthetic.hpp"
#include "dpsketch/verify.hpp"

namespace {

using namespace dpsketch;

// Pinned tolerances.
constexpr double kFormulaRelTol = 1e-9;
constexpr double kGramAbsTol = 1e-10;
constexpr double kAugmentSminRelTol = 1e-6;
constexpr double kAugmentNormRelTol = 1e-8;
constexpr double kTailSlack = 0.02;
constexpr std::size_t kTailTrials = 10000;
constexpr double kJlBandLow = 0.65;
constexpr double kJlBandHigh = 1.35;
constexpr double kJlMinFraction = 0.95;
constexpr double kL2RatioCeiling = 1.5;
constexpr double kPrivateMinFraction = 0.5;
constexpr double kOracleRelTol = 0.01;
constexpr double kL1RatioCeiling = 10.0;
constexpr double kSensitivitySlack = 1e-9;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

double rel_err(double got, long double want) {
  return static_cast<double>(std::fabs(static_cast<long double>(got) - want) / std::fabs(want));
}

// 1. Closed-form calculators against an independent long-double evaluation.
Outcome formula_exactness() {
  const PrivacyParams pp(1.0, 0.05);
  const RowBound one(1.0);
  Vector e2 = Vector::Zero(2);
  e2(0) = 1.0;
  const long double ln25 = std::log(25.0L);
  const long double ln8 = std::log(8.0L);
  const long double ln160 = std::log(160.0L);
  struct Row {
    const char* name;
    double got;
    long double oracle;
    double quoted;      // figure as printed in the worked example
    double quoted_tol;  // its rounding
  };
  const Row rows[] = {
      {"gaussian_sigma", gaussian_sigma(2.0, pp), 2.0L * std::sqrt(2.0L * ln25), 5.0746, 1e-4},
      // 336.16 was hand evaluated with sqrt(200 ln 160) taken as 31.870
      // (it is 31.860); the expression evaluates to 336.0797.
      {"threshold_w_squared", threshold_w_squared(one, pp, 100),
       8.0L * (std::sqrt(200.0L * ln160) + 2.0L * ln160), 336.16, 0.1},
      {"ridge_coeff_bound_l2", ridge_coeff_bound_l2(one, pp, 8, e2),
       13.0L * std::sqrt(8.0L * ln8 * ln25), 95.1, 0.05},
      {"l1_coeff_bound_simple", l1_coeff_bound_simple(one, pp, 8, e2),
       16.0L * ln8 * std::sqrt(2.0L * ln25), 84.4, 0.05},
      {"l1_coeff_bound_multilevel", l1_coeff_bound_multilevel(one, pp, 8, 4, e2),
       32.0L * ln8 * std::sqrt(2.0L * ln25), 168.8, 0.05},
  };
  Outcome o{true, ""};
  double worst = 0.0;
  for (const Row& r : rows) {
    const double err = rel_err(r.got, r.oracle);
    worst = std::max(worst, err);
    if (err > kFormulaRelTol || std::abs(r.got - r.quoted) > r.quoted_tol) {
      o.pass = false;
      o.detail += std::string(r.name) + "=" + fmt(r.got) + " ";
    }
  }
  o.detail += "max rel err vs oracle " + fmt(worst);
  return o;
}

// 2. [A; wI]^T [A; wI] = A^T A + w^2 I.
Outcome ridge_identity() {
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Matrix a = sample_gaussian_matrix(50, 6, 1.0, derive_seed(2, s));
    const double w = 0.5 + static_cast<double>(s % 7);
    const Index k = a.cols();
    const Matrix hat = vstack(a, w * Matrix::Identity(k, k));
    const Matrix diff =
        hat.transpose() * hat - (a.transpose() * a + w * w * Matrix::Identity(k, k));
    worst = std::max(worst, diff.cwiseAbs().maxCoeff());
  }
  return {worst <= kGramAbsTol, "max |entry error| " + fmt(worst) + " over 100 instances"};
}

// 3. Spectral augmentation lifts sigma_min to w and keeps ||Q beta|| = ||A beta||.
Outcome spectral_augmentation() {
  double worst_smin = 0.0;
  double worst_norm = 0.0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const Matrix a = sample_gaussian_matrix(50, 6, 0.2, derive_seed(3, s));
    const double w = min_singular_value(a) * (1.5 + static_cast<double>(s % 10));
    const SpectralAugmentation aug = spectral_augment(a, w);
    worst_smin = std::max(worst_smin, std::abs(min_singular_value(aug.augmented) / w - 1.0));
    const Matrix q = aug.augmented.bottomRows(a.cols()) / aug.c;
    for (int k = 0; k < 5; ++k) {
      const Vector beta = sample_gaussian_matrix(6, 1, 1.0, derive_seed(30 + s, k)).col(0);
      worst_norm = std::max(worst_norm, std::abs((q * beta).norm() / (a * beta).norm() - 1.0));
    }
  }
  return {worst_smin <= kAugmentSminRelTol && worst_norm <= kAugmentNormRelTol,
          "sigma_min rel err " + fmt(worst_smin) + ", ||Q beta|| rel err " + fmt(worst_norm)};
}

Outcome tail_suite(const SuiteResult& res) {
  Outcome o{true, ""};
  double worst = 0.0;
  for (const BoundReport& r : res.reports) {
    if (r.informational) continue;
    worst = std::max(worst, r.exceedance_rate());
    if (r.exceedance_rate() > kConstantProbability + kTailSlack) {
      o.pass = false;
      o.detail += r.bound_name + " rate " + fmt(r.exceedance_rate()) + "; ";
    }
  }
  o.detail += "worst exceedance " + fmt(worst) + " over " + std::to_string(kTailTrials) +
              " trials";
  return o;
}

// 4. l1 tail of i.i.d. Gaussians against r sigma.
Outcome l1_gaussian_tail() { return tail_suite(suite_lemma1(kTailTrials, 4)); }

// 5. Ridge-coefficient tail, both noise-row counts.
Outcome ridge_tail() { return tail_suite(suite_thm1(kTailTrials, 5)); }

// 6. Single-level and multi-level l1 tails.
Outcome l1_coefficient_tails() {
  SuiteResult both = suite_lemma2(kTailTrials, 6);
  const SuiteResult multi = suite_thm2(kTailTrials, 7);
  both.reports.insert(both.reports.end(), multi.reports.begin(), multi.reports.end());
  return tail_suite(both);
}

// 7. JL distortion of 20 fixed unit vectors in R^200 across 200 seeds.
Outcome jl_distortion() {
  const auto ratios = jl_distortion_ratios(200, 8);
  const auto inside = std::count_if(ratios.begin(), ratios.end(), [](double q) {
    return q >= kJlBandLow && q <= kJlBandHigh;
  });
  const double frac = static_cast<double>(inside) / static_cast<double>(ratios.size());
  return {frac >= kJlMinFraction,
          "fraction in [0.65, 1.35]: " + fmt(frac) + " of " + std::to_string(ratios.size())};
}

// 8. Non-private JL sketch-and-solve approximation ratio.
Outcome l2_approximation() {
  const auto ratios = jl_approximation_ratios(100, 9);
  const double med = detail::median(ratios);
  return {med <= kL2RatioCeiling, "median ratio " + fmt(med) + " at r=" +
                                      std::to_string(approx_ratio_rows(5))};
}

// 9. Private l2 releases: excess loss on the original data against the
// analytic regularisation bound at the solution's beta_aug (squared, since
// the loss is squared).
Outcome private_l2_end_to_end() {
  const SyntheticRegression inst = make_synthetic_regression(5000, 5, 0.5, 10);
  const double optimal = regression_loss(
      inst.data.matrix(), exact_solution(inst.data, Norm::l2).beta_aug, Norm::l2);
  const RowBound b(1.0);
  const Index r = 200;
  Outcome o{true, ""};
  for (double eps : {1.0, 4.0}) {
    const PrivacyParams pp(eps, 0.05);
    std::vector<int> cs_ok(100, 0);
    std::vector<int> jl_ok(100, 0);
    std::vector<int> finite(100, 1);
    parallel_for(100, [&](std::size_t t) {
      const std::uint64_t seed = derive_seed(11, t + (eps > 1.0 ? 1000 : 0));
      const CountSketchRelease cs = private_countsketch_l2(inst.data, r, pp, b, seed);
      const RegressionSolution cs_sol = solve_l2_sketch(SketchProblem{cs.sketch, std::nullopt});
      const double cs_loss = regression_loss(inst.data.matrix(), cs_sol.beta_aug, Norm::l2);
      const double cs_bound = ridge_coeff_bound_l2(b, pp, r, cs_sol.beta_aug);
      cs_ok[t] = (cs_loss - optimal) <= cs_bound * cs_bound;

      const JlRelease jl = private_jl_sketch(inst.data, JlConfig{r, pp, b, seed});
      const RegressionSolution jl_sol = solve_l2_sketch(SketchProblem{jl.sketch, std::nullopt});
      const double jl_loss = regression_loss(inst.data.matrix(), jl_sol.beta_aug, Norm::l2);
      jl_ok[t] = (jl_loss - optimal) <= jl.meta.w_squared * jl_sol.beta_aug.squaredNorm();
      finite[t] = std::isfinite(cs_loss) && std::isfinite(jl_loss);
    });
    const auto count = [](const std::vector<int>& v) {
      return static_cast<double>(std::count(v.begin(), v.end(), 1)) / 100.0;
    };
    const double fcs = count(cs_ok);
    const double fjl = count(jl_ok);
    const bool all_finite = count(finite) == 1.0;
    o.pass = o.pass && all_finite && fcs >= kPrivateMinFraction && fjl >= kPrivateMinFraction;
    o.detail += "eps=" + fmt(eps) + " cs2 " + fmt(fcs) + " jl " + fmt(fjl) + "; ";
  }
  o.detail += "fraction of seeds within bound";
  return o;
}

// 10. IRLS against the vertex-enumeration oracle.
Outcome l1_solver_oracle() {
  Rng rng(12);
  double worst = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Index d = 1 + static_cast<Index>(rng.below(2));
    const Index r = d + 2 + static_cast<Index>(rng.below(static_cast<std::uint64_t>(19 - d)));
    const Matrix m = sample_gaussian_matrix(r, d + 1, 1.0, derive_seed(120, t));
    Vector w(r);
    for (Index i = 0; i < r; ++i) w(i) = 0.25 + 2.0 * rng.uniform();
    const SketchProblem p{m, w};
    const double oracle = lad_vertex_oracle(p).sketch_loss;
    const double irls = solve_l1_weighted(p).sketch_loss;
    worst = std::max(worst, std::abs(irls - oracle) / oracle);
  }
  return {worst <= kOracleRelTol, "max relative objective gap " + fmt(worst)};
}

// 11. Zero-noise multi-level sketch approximation for l1 regression.
Outcome l1_sketch_approximation() {
  const SyntheticRegression inst =
      make_synthetic_regression(5000, 3, 0.5, 13, ResidualLaw::laplace);
  const double optimal = regression_loss(
      inst.data.matrix(), exact_solution(inst.data, Norm::l1).beta_aug, Norm::l1);
  const L1Layout layout = l1_layout_for_budget(400, 5000, 2.0, 1);
  std::vector<double> ratios(50);
  parallel_for(50, [&](std::size_t t) {
    L1SketchConfig cfg{2.0, layout.buckets, 1, layout.uniform_buckets, PrivacyParams(1.0, 0.05),
                       RowBound(1.0), derive_seed(14, t), L1NoiseCalibration::algorithm,
                       LevelAssignment::bernoulli, 0.0};
    const WeightedSketch ws = private_l1_sketch(inst.data, cfg);
    const RegressionSolution sol = solve_l1_weighted(SketchProblem{ws.rows, ws.weights});
    ratios[t] = regression_loss(inst.data.matrix(), sol.beta_aug, Norm::l1) / optimal;
  });
  const double med = detail::median(ratios);
  return {med <= kL1RatioCeiling, "median ratio " + fmt(med) + " at r=" +
                                      std::to_string(l1_sketch_rows(layout.buckets, layout.levels,
                                                                    layout.uniform_buckets))};
}

// 12. Neighbouring datasets under one plan differ by at most 2B.
Outcome sensitivity_audit() {
  const RowBound b(1.0);
  const PrivacyParams pp(1.0, 0.05);
  Rng rng(15);
  double worst = 0.0;
  int multi_bucket = 0;
  for (int t = 0; t < 100; ++t) {
    Matrix a = sample_gaussian_matrix(300, 4, 1.0, derive_seed(150, t));
    clip_rows(a, b);
    Matrix a2 = a;
    const Index k = static_cast<Index>(rng.below(300));
    // Alternate between the worst case (negated row at norm B) and a random
    // replacement.
    if (t % 2 == 0) {
      a.row(k) *= b.value() / a.row(k).norm();
      a2.row(k) = -a.row(k);
    } else {
      Vector v = sample_gaussian_matrix(4, 1, 1.0, derive_seed(151, t)).col(0);
      a2.row(k) = (v * (rng.uniform() / v.norm())).transpose();
    }
    const std::uint64_t seed = derive_seed(152, t);
    CountSketchPlan p1;
    CountSketchPlan p2;
    CountSketchOptions o1;
    CountSketchOptions o2;
    o1.debug_plan = &p1;
    o2.debug_plan = &p2;
    const auto s1 = private_countsketch_l2(DataMatrix::certify(a, b), 32, pp, b, seed, o1);
    const auto s2 = private_countsketch_l2(DataMatrix::certify(a2, b), 32, pp, b, seed, o2);
    if (p1.bucket_of != p2.bucket_of || p1.sign_of != p2.sign_of) return {false, "plan differs"};
    const Matrix diff = s1.sketch - s2.sketch;
    int rows_changed = 0;
    for (Index i = 0; i < diff.rows(); ++i) rows_changed += diff.row(i).norm() > 1e-12;
    multi_bucket += rows_changed > 1;
    worst = std::max(worst, diff.norm());
  }
  return {worst <= countsketch_sensitivity(b) + kSensitivitySlack && multi_bucket == 0,
          "max ||SA - SA'|| " + fmt(worst) + ", pairs touching >1 row: " +
              std::to_string(multi_bucket)};
}

// 13. Serialized releases hold neither the seed nor a raw data row.
Outcome privacy_hygiene() {
  SyntheticRegression inst = make_synthetic_regression(500, 3, 0.5, 16);
  Matrix a = inst.data.matrix();
  const double sentinel[] = {0.1234567890123457, -0.2718281828459045, 0.3141592653589793,
                             -0.1618033988749895};
  for (Index j = 0; j < 4; ++j) a(42, j) = sentinel[j];
  const DataMatrix data = DataMatrix::certify(a, RowBound(1.0));
  const std::uint64_t seed = 0xDEADBEEFCAFEF00Dull;
  const auto has = [](const std::string& hay, const void* p, std::size_t n) {
    return hay.find(std::string(static_cast<const char*>(p), n)) != std::string::npos;
  };
  std::string leaks;
  for (const char* method : {"jl", "cs2", "l1", "l1-illus"}) {
    SketchCommand cmd;
    cmd.method = method;
    cmd.epsilon = 1.0;
    cmd.delta = 0.05;
    cmd.bound = 1.0;
    cmd.rows = 60;
    cmd.seed = seed;
    std::ostringstream log;
    std::stringstream buf;
    write_sketch(buf, make_release(data, cmd, log));
    const std::string bytes = buf.str();
    bool leak = has(bytes, &seed, sizeof seed) ||
                bytes.find(std::to_string(seed)) != std::string::npos ||
                bytes.find("seed") != std::string::npos;
    const auto low = static_cast<std::uint32_t>(seed);
    leak = leak || has(bytes, &low, sizeof low);
    for (double v : sentinel) leak = leak || has(bytes, &v, sizeof v);
    // Also the row as one contiguous little-endian block.
    leak = leak || has(bytes, sentinel, sizeof sentinel);
    if (leak) leaks += std::string(method) + " ";
  }
  return {leaks.empty(), leaks.empty() ? "no seed or sentinel bytes in 4 release formats"
                                       : "leak in: " + leaks};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {1, "formula exactness", formula_exactness},
      {2, "ridge augmentation identity", ridge_identity},
      {3, "spectral augmentation", spectral_augmentation},
      {4, "l1 Gaussian tail", l1_gaussian_tail},
      {5, "ridge coefficient tail", ridge_tail},
      {6, "l1 coefficient tails", l1_coefficient_tails},
      {7, "JL distortion", jl_distortion},
      {8, "l2 sketch-and-solve ratio", l2_approximation},
      {9, "private l2 end-to-end", private_l2_end_to_end},
      {10, "l1 solver vs oracle", l1_solver_oracle},
      {11, "l1 sketch approximation", l1_sketch_approximation},
      {12, "sensitivity audit", sensitivity_audit},
      {13, "privacy hygiene", privacy_hygiene},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    std::printf("%s  %2d  %-30s %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d/13 criteria passed\n", 13 - failures);
  return failures == 0 ? 0 : 1;
}
