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

// Private sketches for least absolute deviations.
//
// Two variants share the noise-row construction of the private CountSketch:
//
//  * the single-level illustration sketch, an unsigned CountSketch of
//    [A; eta] (every column of S holds a single 1);
//
//  * the multi-level weighted sketch. Rows of [A; eta] are hashed into
//    h_m + 1 levels:
//      level 0        s CountMin-style copies, one bucket in each block of
//                     N' = N / s buckets, weight 1/s
//      level h        1 <= h < h_m, kept with probability b^-h into one of
//                     N buckets, weight b^h
//      uniform level  kept with probability b^-h_m into one of N_u buckets,
//                     weight b^h_m
//    so r = N h_m + N_u rows are released with their weights. The weights
//    depend only on (b, s, N, N_u, h_m), never on the data.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dpsketch/countsketch.hpp"
#include "dpsketch/error.hpp"
#include "dpsketch/linalg.hpp"
#include "dpsketch/mechanisms.hpp"
#include "dpsketch/random.hpp"

namespace dpsketch {

// h_m = max(1, ceil(log_b n)).
inline std::size_t level_count(std::size_t n, double branching) {
  if (n < 1) throw ParameterError("level_count: n must be >= 1");
  if (!(branching > 1.0) || !std::isfinite(branching)) {
    throw ParameterError("level_count: b must be > 1");
  }
  const double exact = std::log(static_cast<double>(n)) / std::log(branching);
  // Absorb rounding in exact powers such as log_10(1000).
  const double levels = std::ceil(exact - 1e-9);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::max(0.0, levels)));
}

// Unsigned CountSketch of [A; eta], sigma = gaussian_sigma(2B).
inline CountSketchRelease illustration_sketch_private(const DataMatrix& data, Index rows,
                                                      const PrivacyParams& pp, RowBound bound,
                                                      std::uint64_t seed,
                                                      CountSketchOptions options = {}) {
  options.signed_entries = false;
  return detail::noised_countsketch(data, rows, pp, bound, seed, options);
}

// How sigma is chosen for the multi-level sketch.
enum class L1NoiseCalibration {
  // sigma = 2B h_m / eps * sqrt(2 ln(1.25/delta)), raised to the
  // conservative-sensitivity sigma when s is large enough to exceed it.
  algorithm,
  // Gaussian mechanism at sensitivity 2B sqrt(s + h_m).
  conservative_sensitivity,
  // Gaussian mechanism at sensitivity 2B sqrt(h_m).
  sqrt_levels_sensitivity,
};

inline const char* to_string(L1NoiseCalibration c) {
  switch (c) {
    case L1NoiseCalibration::algorithm: return "algorithm";
    case L1NoiseCalibration::conservative_sensitivity: return "conservative";
    case L1NoiseCalibration::sqrt_levels_sensitivity: return "sqrt-levels";
  }
  return "?";
}

enum class LevelAssignment {
  // Independent inclusion at every level 1..h_m-1 with probability b^-h.
  bernoulli,
  // At most one of the levels 1..h_m-1, level h chosen with probability b^-h
  // (renormalised when the total exceeds 1, which happens for b < 2).
  categorical,
};

struct L1SketchConfig {
  double branching = 2.0;          // b > 1
  Index buckets = 0;               // N, buckets per level 0..h_m-1
  Index sparsity = 1;              // s, level-0 copies; divides N
  Index uniform_buckets = 0;       // N_u
  PrivacyParams privacy;
  RowBound bound;
  std::uint64_t seed = 0;
  L1NoiseCalibration calibration = L1NoiseCalibration::algorithm;
  LevelAssignment assignment = LevelAssignment::bernoulli;
  std::optional<double> sigma_override;  // testing only
};

struct WeightedSketch {
  Matrix rows;                          // r x (d+1)
  Vector weights;                       // length r
  std::vector<std::size_t> level_of;    // level of each row, in [0, h_m]
  std::size_t levels = 0;               // h_m
  double sigma = 0.0;
  Index noise_rows = 0;                 // p
  Index patched_rows = 0;
  std::vector<Index> data_rows_per_level;  // occupancy, length h_m + 1
  // Largest number of buckets any single data row was added to.
  Index max_row_memberships = 0;
};

inline Index l1_sketch_rows(Index buckets, std::size_t levels, Index uniform_buckets) {
  return buckets * static_cast<Index>(levels) + uniform_buckets;
}

inline void validate(const L1SketchConfig& cfg) {
  if (!(cfg.branching > 1.0) || !std::isfinite(cfg.branching)) {
    throw ParameterError("l1 sketch: branching parameter b must be > 1");
  }
  if (cfg.sparsity < 1) throw ParameterError("l1 sketch: s must be >= 1");
  if (cfg.buckets < 1 || cfg.buckets % cfg.sparsity != 0) {
    throw ParameterError("l1 sketch: N must be a positive multiple of s");
  }
  if (cfg.uniform_buckets < 1) throw ParameterError("l1 sketch: N_u must be >= 1");
}

// Splits a row budget r into (N, N_u): N_u = N by default, otherwise the
// given N_u, with N rounded down to a multiple of s.
struct L1Layout {
  Index buckets = 0;
  Index uniform_buckets = 0;
  std::size_t levels = 0;
};

inline L1Layout l1_layout_for_budget(Index budget, std::size_t n, double branching,
                                     Index sparsity, std::optional<Index> uniform_buckets = {}) {
  const std::size_t levels = level_count(n, branching);
  if (sparsity < 1) throw ParameterError("l1 layout: s must be >= 1");
  const auto h = static_cast<Index>(levels);
  Index buckets = 0;
  Index nu = 0;
  if (uniform_buckets) {
    nu = *uniform_buckets;
    buckets = (budget - nu) / h;
  } else {
    buckets = budget / (h + 1);
  }
  buckets -= buckets % sparsity;
  if (!uniform_buckets) nu = buckets;
  if (buckets < 1 || nu < 1) {
    throw ParameterError("l1 layout: row budget " + std::to_string(budget) +
                         " too small for " + std::to_string(levels) + " levels");
  }
  return L1Layout{buckets, nu, levels};
}

inline double l1_sigma(const L1SketchConfig& cfg, std::size_t levels) {
  const auto s = static_cast<std::size_t>(cfg.sparsity);
  const double conservative = gaussian_sigma(
      l1_sketch_sensitivity(cfg.bound, levels, s, SensitivityMode::conservative), cfg.privacy);
  switch (cfg.calibration) {
    case L1NoiseCalibration::algorithm:
      return std::max(gaussian_sigma(2.0 * cfg.bound.value() * static_cast<double>(levels),
                                     cfg.privacy),
                      conservative);
    case L1NoiseCalibration::conservative_sensitivity:
      return conservative;
    case L1NoiseCalibration::sqrt_levels_sensitivity:
      return gaussian_sigma(
          l1_sketch_sensitivity(cfg.bound, levels, s, SensitivityMode::sqrt_levels),
          cfg.privacy);
  }
  return conservative;
}

inline WeightedSketch private_l1_sketch(const DataMatrix& data, const L1SketchConfig& cfg) {
  validate(cfg);
  if (cfg.bound.value() < data.bound().value()) {
    throw CertificationError("private_l1_sketch: data certified for a larger bound than B");
  }
  const Index n = data.rows();
  const Index cols = data.cols();
  const std::size_t levels = level_count(static_cast<std::size_t>(n), cfg.branching);
  const auto h_m = static_cast<Index>(levels);
  const Index big_n = cfg.buckets;
  const Index block = big_n / cfg.sparsity;
  const Index r = l1_sketch_rows(big_n, levels, cfg.uniform_buckets);
  const Index uniform_offset = big_n * h_m;

  WeightedSketch out;
  out.levels = levels;
  out.sigma = cfg.sigma_override.value_or(l1_sigma(cfg, levels));
  if (!(out.sigma >= 0.0)) throw ParameterError("private_l1_sketch: sigma must be >= 0");
  out.noise_rows = noise_row_count(r);
  out.rows = Matrix::Zero(r, cols);
  out.weights.resize(r);
  out.level_of.resize(static_cast<std::size_t>(r));
  out.data_rows_per_level.assign(levels + 1, 0);

  for (Index i = 0; i < r; ++i) {
    const std::size_t level =
        i >= uniform_offset ? levels : static_cast<std::size_t>(i / big_n);
    out.level_of[i] = level;
    out.weights(i) = level == 0 ? 1.0 / static_cast<double>(cfg.sparsity)
                                : std::pow(cfg.branching, static_cast<double>(level));
  }

  std::vector<double> keep(levels + 1, 0.0);
  for (std::size_t h = 1; h <= levels; ++h) {
    keep[h] = std::pow(cfg.branching, -static_cast<double>(h));
  }
  double categorical_total = 0.0;
  for (std::size_t h = 1; h < levels; ++h) categorical_total += keep[h];
  const double categorical_scale = categorical_total > 1.0 ? 1.0 / categorical_total : 1.0;

  Rng assign_rng(derive_seed(cfg.seed, 1));
  Rng noise_rng(derive_seed(cfg.seed, 2));
  std::vector<Index> coverage(static_cast<std::size_t>(r), 0);
  std::vector<Index> targets;
  targets.reserve(static_cast<std::size_t>(cfg.sparsity + h_m));
  Vector noise_row(cols);

  const Index total = n + out.noise_rows;
  for (Index i = 0; i < total; ++i) {
    const bool is_data = i < n;
    targets.clear();
    for (Index l = 0; l < cfg.sparsity; ++l) {
      targets.push_back(l * block + static_cast<Index>(assign_rng.below(block)));
    }
    if (cfg.assignment == LevelAssignment::bernoulli) {
      for (std::size_t h = 1; h < levels; ++h) {
        if (assign_rng.bernoulli(keep[h])) {
          targets.push_back(static_cast<Index>(h) * big_n +
                            static_cast<Index>(assign_rng.below(big_n)));
        }
      }
    } else if (levels > 1) {
      double u = assign_rng.uniform();
      for (std::size_t h = 1; h < levels; ++h) {
        const double ph = keep[h] * categorical_scale;
        if (u < ph) {
          targets.push_back(static_cast<Index>(h) * big_n +
                            static_cast<Index>(assign_rng.below(big_n)));
          break;
        }
        u -= ph;
      }
    }
    if (assign_rng.bernoulli(keep[levels])) {
      targets.push_back(uniform_offset +
                        static_cast<Index>(assign_rng.below(cfg.uniform_buckets)));
    }

    if (is_data) {
      for (Index t : targets) {
        out.rows.row(t) += data.matrix().row(i);
        ++out.data_rows_per_level[out.level_of[t]];
      }
      out.max_row_memberships =
          std::max(out.max_row_memberships, static_cast<Index>(targets.size()));
    } else {
      for (Index j = 0; j < cols; ++j) noise_row(j) = noise_rng.gaussian(out.sigma);
      for (Index t : targets) {
        out.rows.row(t) += noise_row.transpose();
        ++coverage[t];
      }
    }
  }

  for (Index t = 0; t < r; ++t) {
    if (coverage[t] > 0) continue;
    for (Index j = 0; j < cols; ++j) out.rows(t, j) += noise_rng.gaussian(out.sigma);
    ++coverage[t];
    ++out.patched_rows;
  }
  return out;
}

// r * sigma: with probability >= 3/4 the l1 norm of r i.i.d. N(0, sigma^2)
// draws stays below this.
inline double l1_tail_bound(Index rows, double sigma) {
  if (rows < 1) throw ParameterError("l1_tail_bound: r must be >= 1");
  if (!(sigma >= 0.0)) throw ParameterError("l1_tail_bound: sigma must be >= 0");
  return static_cast<double>(rows) * sigma;
}

}  // namespace dpsketch
