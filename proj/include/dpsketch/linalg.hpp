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

// Dense linear algebra used throughout the library. Storage and the
// decompositions come from Eigen; this header pins the contracts (finite
// inputs, descending singular values, rank checks) the sketchers rely on.

#include <cmath>
#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "dpsketch/error.hpp"
#include "dpsketch/random.hpp"

namespace dpsketch {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

struct SvdResult {
  Matrix U;                // n x k, orthonormal columns
  Vector singular_values;  // length k, nonincreasing
  Matrix V;                // k x k, columns are right singular vectors
};

inline void require_finite(const Matrix& m, const char* what) {
  if (m.size() == 0) {
    throw DimensionError(std::string(what) + ": empty matrix");
  }
  if (!m.allFinite()) {
    throw DecompositionError(std::string(what) + ": non-finite entry");
  }
}

inline SvdResult svd(const Matrix& m) {
  require_finite(m, "svd");
  // Two-sided Jacobi on the QR-preconditioned matrix: high relative accuracy
  // for the small singular values, which the private JL branch test reads.
  Eigen::JacobiSVD<Matrix, Eigen::ColPivHouseholderQRPreconditioner> solver(
      m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (solver.info() != Eigen::Success) {
    throw DecompositionError("svd: Jacobi sweeps did not converge");
  }
  return SvdResult{solver.matrixU(), solver.singularValues(),
                   solver.matrixV()};
}

inline double min_singular_value(const Matrix& m) {
  const SvdResult s = svd(m);
  return s.singular_values(s.singular_values.size() - 1);
}

// argmin_v ||m v - rhs||_2 via column-pivoted Householder QR.
inline Vector qr_least_squares(const Matrix& m, const Vector& rhs) {
  require_finite(m, "qr_least_squares");
  if (m.rows() != rhs.size()) {
    throw DimensionError("qr_least_squares: rhs length does not match rows");
  }
  if (m.rows() < m.cols()) {
    throw SingularSystemError("qr_least_squares: fewer rows than columns");
  }
  if (!rhs.allFinite()) {
    throw DecompositionError("qr_least_squares: non-finite rhs");
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(m);
  if (qr.rank() < m.cols()) {
    throw SingularSystemError("qr_least_squares: matrix is rank deficient");
  }
  return qr.solve(rhs);
}

// rows x cols matrix of i.i.d. N(0, sigma^2), filled in row-major order.
inline Matrix sample_gaussian_matrix(Index rows, Index cols, double sigma,
                                     std::uint64_t seed) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw ParameterError("sample_gaussian_matrix: sigma must be >= 0");
  }
  if (rows < 1 || cols < 1) {
    throw DimensionError("sample_gaussian_matrix: empty shape");
  }
  Matrix out(rows, cols);
  Rng rng(seed);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) out(i, j) = rng.gaussian(sigma);
  }
  return out;
}

inline double sample_laplace(double scale, std::uint64_t seed) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw ParameterError("sample_laplace: scale must be > 0");
  }
  Rng rng(seed);
  return rng.laplace(scale);
}

inline Vector row_norms(const Matrix& m) { return m.rowwise().norm(); }

inline Matrix vstack(const Matrix& top, const Matrix& bottom) {
  if (top.cols() != bottom.cols()) {
    throw DimensionError("vstack: column counts differ");
  }
  Matrix out(top.rows() + bottom.rows(), top.cols());
  out.topRows(top.rows()) = top;
  out.bottomRows(bottom.rows()) = bottom;
  return out;
}

}  // namespace dpsketch
