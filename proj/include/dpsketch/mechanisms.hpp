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

// Privacy parameters, certified data matrices and Gaussian mechanism
// calibration.

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>

#include "dpsketch/error.hpp"
#include "dpsketch/linalg.hpp"

namespace dpsketch {

class PrivacyParams {
 public:
  PrivacyParams(double epsilon, double delta) : epsilon_(epsilon), delta_(delta) {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      throw ParameterError("epsilon must be a finite value > 0");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
      throw ParameterError("delta must lie in (0, 1)");
    }
  }

  double epsilon() const noexcept { return epsilon_; }
  double delta() const noexcept { return delta_; }

 private:
  double epsilon_;
  double delta_;
};

// Upper bound on the l2 norm of every row of A = [X, y].
class RowBound {
 public:
  explicit RowBound(double bound) : value_(bound) {
    if (!(bound > 0.0) || !std::isfinite(bound)) {
      throw ParameterError("row bound B must be a finite value > 0");
    }
  }

  double value() const noexcept { return value_; }

 private:
  double value_;
};

// Relative slack when comparing a row norm against B; rows rescaled to
// exactly B may land one ulp above it.
inline constexpr double kRowBoundSlack = 1e-12;

// The n x (d+1) matrix A = [X, y] whose rows are certified to have l2 norm
// at most B. Only constructible through certify().
class DataMatrix {
 public:
  static DataMatrix certify(Matrix a, RowBound bound) {
    require_finite(a, "DataMatrix");
    if (a.cols() < 2) {
      throw DimensionError("DataMatrix needs at least one feature and a response");
    }
    const Vector norms = row_norms(a);
    const double limit = bound.value() * (1.0 + kRowBoundSlack);
    for (Index i = 0; i < norms.size(); ++i) {
      if (norms(i) > limit) {
        throw CertificationError("row " + std::to_string(i) + " has l2 norm " +
                                 std::to_string(norms(i)) +
                                 " above the declared bound " +
                                 std::to_string(bound.value()));
      }
    }
    return DataMatrix(std::move(a), bound);
  }

  const Matrix& matrix() const noexcept { return a_; }
  RowBound bound() const noexcept { return bound_; }
  Index rows() const noexcept { return a_.rows(); }
  Index cols() const noexcept { return a_.cols(); }
  Index features() const noexcept { return a_.cols() - 1; }

  auto features_block() const { return a_.leftCols(a_.cols() - 1); }
  auto response() const { return a_.col(a_.cols() - 1); }

 private:
  DataMatrix(Matrix a, RowBound bound) : a_(std::move(a)), bound_(bound) {}

  Matrix a_;
  RowBound bound_;
};

// Rescales every row whose l2 norm exceeds `bound` down to norm `bound`.
// Returns the number of rows touched.
inline std::size_t clip_rows(Matrix& a, RowBound bound) {
  std::size_t clipped = 0;
  for (Index i = 0; i < a.rows(); ++i) {
    const double norm = a.row(i).norm();
    if (norm > bound.value()) {
      a.row(i) *= bound.value() / norm;
      ++clipped;
    }
  }
  return clipped;
}

// sigma = sensitivity / epsilon * sqrt(2 ln(1.25 / delta)).
inline double gaussian_sigma(double sensitivity, const PrivacyParams& pp) {
  if (!(sensitivity >= 0.0) || !std::isfinite(sensitivity)) {
    throw ParameterError("sensitivity must be a finite value >= 0");
  }
  return sensitivity / pp.epsilon() * std::sqrt(2.0 * std::log(1.25 / pp.delta()));
}

// A changed row moves exactly one CountSketch bucket, by at most 2B.
inline double countsketch_sensitivity(RowBound bound) { return 2.0 * bound.value(); }

enum class SensitivityMode {
  // Worst-case bucket memberships: s at level 0 plus one per level 1..h_m.
  conservative,
  // 2B sqrt(h_m): one membership per level, level-0 copies ignored.
  sqrt_levels,
};

inline const char* to_string(SensitivityMode mode) {
  return mode == SensitivityMode::conservative ? "conservative" : "sqrt-levels";
}

inline double l1_sketch_sensitivity(RowBound bound, std::size_t levels,
                                    std::size_t sparsity,
                                    SensitivityMode mode = SensitivityMode::conservative) {
  if (levels < 1 || sparsity < 1) {
    throw ParameterError("l1_sketch_sensitivity: h_m and s must be >= 1");
  }
  const double memberships = mode == SensitivityMode::conservative
                                 ? static_cast<double>(sparsity + levels)
                                 : static_cast<double>(levels);
  return 2.0 * bound.value() * std::sqrt(memberships);
}

}  // namespace dpsketch
