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

// Private CountSketch for least squares.
//
// Gaussian noise rows are appended to the data, A_hat = [A; eta], and the
// whole stack is CountSketched. With p = ceil(r (ln r + 4)) noise rows every
// bucket is covered with probability >= 1 - r e^-4; any bucket left without a
// noise row receives a dedicated extra one, so every released row is noised.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "dpsketch/error.hpp"
#include "dpsketch/linalg.hpp"
#include "dpsketch/mechanisms.hpp"
#include "dpsketch/random.hpp"

namespace dpsketch {

// One nonzero per column of S: column j maps to bucket bucket_of[j] with sign
// sign_of[j].
struct CountSketchPlan {
  Index rows = 0;
  std::vector<Index> bucket_of;
  std::vector<int> sign_of;

  Index columns() const { return static_cast<Index>(bucket_of.size()); }
};

// Draws buckets uniformly in [0, r) and signs uniformly in {-1, +1}; with
// signed = false all signs are +1.
inline CountSketchPlan draw_countsketch_plan(Index rows, Index columns, Rng& rng,
                                             bool signed_entries = true) {
  if (rows < 1 || columns < 0) throw ParameterError("countsketch plan: need r >= 1");
  CountSketchPlan plan;
  plan.rows = rows;
  plan.bucket_of.resize(static_cast<std::size_t>(columns));
  plan.sign_of.resize(static_cast<std::size_t>(columns));
  for (Index j = 0; j < columns; ++j) {
    plan.bucket_of[j] = static_cast<Index>(rng.below(static_cast<std::uint64_t>(rows)));
    plan.sign_of[j] = signed_entries ? rng.sign() : 1;
  }
  return plan;
}

// Row i of the result is the signed sum of the rows of m mapped to bucket i.
// Rows are accumulated in index order.
inline Matrix countsketch_apply(const CountSketchPlan& plan, const Matrix& m) {
  if (plan.columns() != m.rows() || plan.sign_of.size() != plan.bucket_of.size()) {
    throw DimensionError("countsketch_apply: plan does not cover the rows of M");
  }
  Matrix out = Matrix::Zero(plan.rows, m.cols());
  for (Index j = 0; j < m.rows(); ++j) {
    const Index bucket = plan.bucket_of[j];
    if (bucket < 0 || bucket >= plan.rows) {
      throw DimensionError("countsketch_apply: bucket index out of range");
    }
    out.row(bucket) += static_cast<double>(plan.sign_of[j]) * m.row(j);
  }
  return out;
}

// p = ceil(r (ln r + 4)).
inline Index noise_row_count(Index rows) {
  if (rows < 1) throw ParameterError("noise_row_count: r must be >= 1");
  const double r = static_cast<double>(rows);
  return static_cast<Index>(std::ceil(r * (std::log(r) + 4.0)));
}

struct NoisePlanSummary {
  Index noise_rows = 0;    // p drawn through the sketch
  Index patched_rows = 0;  // extra rows given to uncovered buckets
  double sigma = 0.0;
  Index min_coverage = 0;  // smallest number of noise rows in any bucket
};

struct CountSketchRelease {
  Matrix sketch;
  NoisePlanSummary noise;
};

struct CountSketchOptions {
  bool signed_entries = true;
  // Testing only: replaces the calibrated noise scale.
  std::optional<double> sigma_override;
  // Testing only: receives the drawn plan. Never set this for a release.
  CountSketchPlan* debug_plan = nullptr;
};

namespace detail {

inline CountSketchRelease noised_countsketch(const DataMatrix& data, Index rows,
                                             const PrivacyParams& pp, RowBound bound,
                                             std::uint64_t seed,
                                             const CountSketchOptions& options) {
  if (rows < 1) throw ParameterError("private countsketch: r must be >= 1");
  if (bound.value() < data.bound().value()) {
    throw CertificationError("private countsketch: data certified for a larger bound than B");
  }
  const double sigma = options.sigma_override.value_or(
      gaussian_sigma(countsketch_sensitivity(bound), pp));
  if (!(sigma >= 0.0)) throw ParameterError("private countsketch: sigma must be >= 0");

  const Index n = data.rows();
  const Index cols = data.cols();
  const Index p = noise_row_count(rows);

  Rng plan_rng(derive_seed(seed, 1));
  Rng noise_rng(derive_seed(seed, 2));
  const CountSketchPlan plan = draw_countsketch_plan(rows, n + p, plan_rng, options.signed_entries);

  Matrix a_hat(n + p, cols);
  a_hat.topRows(n) = data.matrix();
  for (Index i = n; i < n + p; ++i) {
    for (Index j = 0; j < cols; ++j) a_hat(i, j) = noise_rng.gaussian(sigma);
  }
  Matrix sketch = countsketch_apply(plan, a_hat);

  std::vector<Index> coverage(static_cast<std::size_t>(rows), 0);
  for (Index j = n; j < n + p; ++j) ++coverage[plan.bucket_of[j]];

  NoisePlanSummary summary;
  summary.noise_rows = p;
  summary.sigma = sigma;
  for (Index i = 0; i < rows; ++i) {
    if (coverage[i] > 0) continue;
    for (Index j = 0; j < cols; ++j) sketch(i, j) += noise_rng.gaussian(sigma);
    ++coverage[i];
    ++summary.patched_rows;
  }
  summary.min_coverage = *std::min_element(coverage.begin(), coverage.end());
  if (options.debug_plan != nullptr) *options.debug_plan = plan;
  return CountSketchRelease{std::move(sketch), summary};
}

}  // namespace detail

// S [A; eta] with eta rows ~ N(0, sigma^2 I), sigma = gaussian_sigma(2B).
// The plan and seed are not part of the result.
inline CountSketchRelease private_countsketch_l2(const DataMatrix& data, Index rows,
                                                 const PrivacyParams& pp, RowBound bound,
                                                 std::uint64_t seed,
                                                 CountSketchOptions options = {}) {
  options.signed_entries = true;
  return detail::noised_countsketch(data, rows, pp, bound, seed, options);
}

}  // namespace dpsketch
