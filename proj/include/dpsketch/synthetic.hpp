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

// Planted regression instances for verification suites and tests.

#include <cstdint>

#include "dpsketch/linalg.hpp"
#include "dpsketch/mechanisms.hpp"
#include "dpsketch/random.hpp"

namespace dpsketch {

enum class ResidualLaw { gaussian, laplace };

struct SyntheticRegression {
  DataMatrix data;
  Vector planted_beta;  // in the units of the rescaled data
};

// X ~ N(0, 1), beta0 ~ N(0, 1), y = X beta0 + noise * residual. All of
// [X, y] is then divided by its largest row norm and multiplied by `bound`,
// which keeps beta0 the planted coefficient vector.
inline SyntheticRegression make_synthetic_regression(Index n, Index d, double noise,
                                                     std::uint64_t seed,
                                                     ResidualLaw law = ResidualLaw::gaussian,
                                                     double bound = 1.0) {
  Rng rng(derive_seed(seed, 0x5eed));
  Matrix a(n, d + 1);
  Vector beta0(d);
  for (Index j = 0; j < d; ++j) beta0(j) = rng.gaussian();
  for (Index i = 0; i < n; ++i) {
    double fit = 0.0;
    for (Index j = 0; j < d; ++j) {
      a(i, j) = rng.gaussian();
      fit += a(i, j) * beta0(j);
    }
    const double e = law == ResidualLaw::gaussian ? rng.gaussian() : rng.laplace(1.0);
    a(i, d) = fit + noise * e;
  }
  a *= bound / row_norms(a).maxCoeff();
  return SyntheticRegression{DataMatrix::certify(std::move(a), RowBound(bound)), beta0};
}

}  // namespace dpsketch
