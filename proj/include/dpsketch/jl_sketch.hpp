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

// Private Johnson-Lindenstrauss sketch.
//
// The release is S*A when a Laplace-noised test certifies that sigma_min(A)
// is far enough above the threshold w. Otherwise A is augmented with c*Q,
// Q = V Sigma V^T, which multiplies every singular value by sqrt(1 + c^2)
// so that sigma_min reaches w, and the release is S*[A; cQ]. In both cases
// S has i.i.d. N(0, 1) entries; the 1/sqrt(r) normalisation is applied only
// by distortion checks, since it does not change the sketched argmin.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "dpsketch/error.hpp"
#include "dpsketch/linalg.hpp"
#include "dpsketch/mechanisms.hpp"
#include "dpsketch/parallel.hpp"
#include "dpsketch/random.hpp"

namespace dpsketch {

struct JlConfig {
  Index rows = 0;  // r, number of projected rows
  PrivacyParams privacy;
  RowBound bound;
  std::uint64_t seed = 0;
};

enum class JlBranch { no_augment, spectral_augment };

inline const char* to_string(JlBranch branch) {
  return branch == JlBranch::no_augment ? "no-augment" : "spectral-augment";
}

// Utility loss factor 1 + c^2 above which the release carries a warning.
inline constexpr double kAugmentWarningFactor = 100.0;

struct JlReleaseMeta {
  JlBranch branch = JlBranch::no_augment;
  double w_squared = 0.0;
  double c = 0.0;
  Index rows = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  double bound = 0.0;
  bool utility_warning = false;

  double utility_factor() const { return 1.0 + c * c; }
};

struct JlRelease {
  Matrix sketch;
  JlReleaseMeta meta;
};

struct SpectralAugmentation {
  Matrix augmented;  // [A; cQ]
  double c = 0.0;
};

// w^2 = 8B^2/eps * (sqrt(2 r ln(8/delta)) + 2 ln(8/delta)).
inline double threshold_w_squared(RowBound bound, const PrivacyParams& pp, Index rows) {
  if (rows < 1) throw ParameterError("threshold_w_squared: r must be >= 1");
  const double b = bound.value();
  const double log_term = std::log(8.0 / pp.delta());
  return 8.0 * b * b / pp.epsilon() *
         (std::sqrt(2.0 * static_cast<double>(rows) * log_term) + 2.0 * log_term);
}

// The Laplace draw Z used by noisy_rank_test for a given seed.
inline double rank_test_noise(RowBound bound, const PrivacyParams& pp, std::uint64_t seed) {
  const double b = bound.value();
  return sample_laplace(4.0 * b * b / pp.epsilon(), seed);
}

// sigma_min^2 > w^2 + Z + 4B^2 ln(1/delta)/eps, Z ~ Lap(4B^2/eps). Ties fail.
inline bool noisy_rank_test(double sigma_min_sq, double w_sq, RowBound bound,
                            const PrivacyParams& pp, std::uint64_t seed) {
  if (!(sigma_min_sq >= 0.0)) {
    throw ParameterError("noisy_rank_test: sigma_min^2 must be >= 0");
  }
  const double b = bound.value();
  const double z = rank_test_noise(bound, pp, seed);
  return sigma_min_sq > w_sq + z + 4.0 * b * b * std::log(1.0 / pp.delta()) / pp.epsilon();
}

namespace detail {

// Relative threshold below which a singular value counts as zero.
inline double rank_tolerance(const SvdResult& s, Index rows, Index cols) {
  return static_cast<double>(std::max(rows, cols)) *
         std::numeric_limits<double>::epsilon() * s.singular_values(0);
}

inline void require_full_rank(const SvdResult& s, Index rows, Index cols, const char* what) {
  const double smin = s.singular_values(s.singular_values.size() - 1);
  if (rows < cols || !(smin > rank_tolerance(s, rows, cols))) {
    throw RankDeficiencyError(std::string(what) + ": matrix is not of full column rank");
  }
}

inline SpectralAugmentation augment_with(const Matrix& a, const SvdResult& s, double c) {
  const Matrix q = s.V * s.singular_values.asDiagonal() * s.V.transpose();
  return SpectralAugmentation{vstack(a, c * q), c};
}

}  // namespace detail

// Returns ([A; cQ], c) with Q = V Sigma V^T and c = sqrt(w^2/sigma_min^2 - 1).
inline SpectralAugmentation spectral_augment(const Matrix& a, double w) {
  if (!(w > 0.0) || !std::isfinite(w)) throw ParameterError("spectral_augment: w must be > 0");
  const SvdResult s = svd(a);
  detail::require_full_rank(s, a.rows(), a.cols(), "spectral_augment");
  const double smin = s.singular_values(s.singular_values.size() - 1);
  if (smin > w * (1.0 + 1e-12)) {
    throw PreconditionError("spectral_augment: sigma_min(A) exceeds w; no augmentation needed");
  }
  const double c = std::sqrt(std::max(0.0, (w * w) / (smin * smin) - 1.0));
  return detail::augment_with(a, s, c);
}

// S * m for S an r x m.rows() matrix of i.i.d. N(0, 1) entries. S is drawn
// in fixed row blocks, each from its own sub-seed, so the result depends
// only on (m, r, seed).
inline Matrix gaussian_sketch(const Matrix& m, Index rows, std::uint64_t seed) {
  if (rows < 1) throw ParameterError("gaussian_sketch: r must be >= 1");
  constexpr Index kBlock = 32;
  const Index blocks = (rows + kBlock - 1) / kBlock;
  Matrix out(rows, m.cols());
  parallel_for(static_cast<std::size_t>(blocks), [&](std::size_t b) {
    const Index first = static_cast<Index>(b) * kBlock;
    const Index count = std::min(kBlock, rows - first);
    const Matrix s = sample_gaussian_matrix(count, m.rows(), 1.0, derive_seed(seed, 2 + b));
    out.middleRows(first, count).noalias() = s * m;
  });
  return out;
}

inline JlRelease private_jl_sketch(const DataMatrix& data, const JlConfig& cfg) {
  if (cfg.rows < 1) throw ParameterError("private_jl_sketch: r must be >= 1");
  if (cfg.bound.value() < data.bound().value()) {
    throw CertificationError("private_jl_sketch: data certified for a larger bound than B");
  }
  const Matrix& a = data.matrix();
  const SvdResult s = svd(a);
  detail::require_full_rank(s, a.rows(), a.cols(), "private_jl_sketch");
  const double smin = s.singular_values(s.singular_values.size() - 1);

  JlReleaseMeta meta;
  meta.w_squared = threshold_w_squared(cfg.bound, cfg.privacy, cfg.rows);
  meta.rows = cfg.rows;
  meta.epsilon = cfg.privacy.epsilon();
  meta.delta = cfg.privacy.delta();
  meta.bound = cfg.bound.value();

  const std::uint64_t test_seed = derive_seed(cfg.seed, 1);
  const std::uint64_t projection_seed = derive_seed(cfg.seed, 2);
  if (noisy_rank_test(smin * smin, meta.w_squared, cfg.bound, cfg.privacy, test_seed)) {
    meta.branch = JlBranch::no_augment;
    return JlRelease{gaussian_sketch(a, cfg.rows, projection_seed), meta};
  }

  // The noisy test can fail even when sigma_min >= w; then c = 0 and the
  // appended block is zero, which leaves sigma_min unchanged.
  const double w = std::sqrt(meta.w_squared);
  const double c = smin >= w ? 0.0 : std::sqrt(meta.w_squared / (smin * smin) - 1.0);
  const SpectralAugmentation aug = detail::augment_with(a, s, c);
  meta.branch = JlBranch::spectral_augment;
  meta.c = c;
  meta.utility_warning = meta.utility_factor() > kAugmentWarningFactor;
  return JlRelease{gaussian_sketch(aug.augmented, cfg.rows, projection_seed), meta};
}

// r = ceil(C * mu^-2 * d * ln(max(d, 2))). C is a tunable, default 1.
inline Index suggest_jl_rows(Index features, double distortion, double constant = 1.0) {
  if (features < 1 || !(distortion > 0.0 && distortion < 1.0) || !(constant > 0.0)) {
    throw ParameterError("suggest_jl_rows: need d >= 1, 0 < mu < 1, C > 0");
  }
  const double d = static_cast<double>(features);
  return static_cast<Index>(
      std::ceil(constant * d * std::log(std::max(d, 2.0)) / (distortion * distortion)));
}

}  // namespace dpsketch
