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

// Regression on released sketches.
//
// A sketch M = S [X, y] is always solved through beta_aug = [beta; -1], so
// that M beta_aug = S X beta - S y and the response column stays inside the
// sketched matrix.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "dpsketch/error.hpp"
#include "dpsketch/linalg.hpp"
#include "dpsketch/mechanisms.hpp"

namespace dpsketch {

enum class SolveMethod { qr, irls, vertex_oracle };

inline const char* to_string(SolveMethod m) {
  switch (m) {
    case SolveMethod::qr: return "qr";
    case SolveMethod::irls: return "irls";
    case SolveMethod::vertex_oracle: return "vertex-oracle";
  }
  return "?";
}

enum class Norm { l1, l2 };

inline const char* to_string(Norm n) { return n == Norm::l1 ? "l1" : "l2"; }

struct SketchProblem {
  Matrix m;                       // r x (d+1)
  std::optional<Vector> weights;  // positive, length r

  Index features() const { return m.cols() - 1; }
};

struct RegressionSolution {
  Vector beta;
  Vector beta_aug;  // [beta; -1]
  double sketch_loss = 0.0;
  SolveMethod method = SolveMethod::qr;
  bool converged = true;
  int iterations = 0;
  // Smoothed IRLS objective after each iteration.
  std::vector<double> objective_history;
};

inline Vector augment(const Vector& beta) {
  Vector out(beta.size() + 1);
  out.head(beta.size()) = beta;
  out(beta.size()) = -1.0;
  return out;
}

namespace detail {

inline void validate(const SketchProblem& p) {
  require_finite(p.m, "sketch problem");
  if (p.m.cols() < 2) throw DimensionError("sketch problem needs d >= 1 plus a response column");
  if (p.weights) {
    if (p.weights->size() != p.m.rows()) {
      throw DimensionError("sketch problem: weight vector length differs from row count");
    }
    for (Index i = 0; i < p.weights->size(); ++i) {
      if (!((*p.weights)(i) > 0.0) || !std::isfinite((*p.weights)(i))) {
        throw ParameterError("sketch problem: weights must be positive and finite");
      }
    }
  }
}

inline Vector weights_or_ones(const SketchProblem& p) {
  return p.weights ? *p.weights : Vector::Ones(p.m.rows());
}

inline double weighted_l1(const Vector& residual, const Vector& w) {
  return (w.array() * residual.array().abs()).sum();
}

inline double smoothed_l1(const Vector& residual, const Vector& w, double smoothing) {
  return (w.array() * (residual.array().square() + smoothing * smoothing).sqrt()).sum();
}

inline RegressionSolution make_solution(Vector beta, double loss, SolveMethod method) {
  RegressionSolution s;
  s.beta_aug = augment(beta);
  s.beta = std::move(beta);
  s.sketch_loss = loss;
  s.method = method;
  return s;
}

}  // namespace detail

// min ||M beta_aug||_2 with the last coordinate pinned to -1.
inline RegressionSolution solve_l2_sketch(const SketchProblem& p) {
  detail::validate(p);
  const Index d = p.features();
  const Vector beta = qr_least_squares(p.m.leftCols(d), p.m.col(d));
  const double loss = (p.m * augment(beta)).squaredNorm();
  return detail::make_solution(beta, loss, SolveMethod::qr);
}

struct IrlsOptions {
  double tol = 1e-9;
  int max_iter = 500;
  // Starting smoothing; <= 0 selects 1e-8 times the largest row norm of M.
  double smoothing = 0.0;
  // Halve the smoothing every this many iterations; 0 keeps it fixed.
  int halve_every = 10;
  // Re-solve by interpolating the d rows with the smallest residuals.
  bool polish = true;
};

// Approximately minimises sum_i w_i |M_i beta_aug| by iteratively reweighted
// least squares on the smoothed objective sum_i w_i sqrt(res_i^2 + eps^2).
// For a fixed eps each step is a majorize-minimize step, so the smoothed
// objective never increases.
inline RegressionSolution solve_l1_weighted(const SketchProblem& p, const IrlsOptions& opt = {}) {
  detail::validate(p);
  if (opt.max_iter < 1 || !(opt.tol >= 0.0)) {
    throw ParameterError("solve_l1_weighted: need max_iter >= 1 and tol >= 0");
  }
  const Index d = p.features();
  const Matrix x = p.m.leftCols(d);
  const Vector y = p.m.col(d);
  const Vector w = detail::weights_or_ones(p);

  const Vector sqrt_w = w.array().sqrt();
  Vector beta = qr_least_squares(sqrt_w.asDiagonal() * x, sqrt_w.cwiseProduct(y));

  const double scale = p.m.rowwise().norm().maxCoeff();
  double smoothing = opt.smoothing > 0.0 ? opt.smoothing : 1e-8 * (scale > 0.0 ? scale : 1.0);

  Vector residual = x * beta - y;
  double objective = detail::weighted_l1(residual, w);
  Vector best_beta = beta;
  double best_objective = objective;

  RegressionSolution out;
  out.converged = false;
  int iter = 0;
  for (; iter < opt.max_iter; ++iter) {
    if (opt.halve_every > 0 && iter > 0 && iter % opt.halve_every == 0) smoothing *= 0.5;
    const Vector u =
        w.array() / (residual.array().square() + smoothing * smoothing).sqrt();
    const Vector sqrt_u = u.array().sqrt();
    Vector next;
    try {
      next = qr_least_squares(sqrt_u.asDiagonal() * x, sqrt_u.cwiseProduct(y));
    } catch (const SingularSystemError&) {
      break;  // weights collapsed onto fewer than d rows; keep the best iterate
    }
    beta = std::move(next);
    residual = x * beta - y;
    out.objective_history.push_back(detail::smoothed_l1(residual, w, smoothing));
    const double previous = objective;
    objective = detail::weighted_l1(residual, w);
    if (objective < best_objective) {
      best_objective = objective;
      best_beta = beta;
    }
    if (std::abs(previous - objective) <= opt.tol * (1.0 + objective)) {
      out.converged = true;
      ++iter;
      break;
    }
  }

  if (opt.polish) {
    // An optimum interpolates d rows; try the rows the iterate nearly fits.
    for (int round = 0; round < 8; ++round) {
      const Vector res = x * best_beta - y;
      std::vector<Index> order(static_cast<std::size_t>(res.size()));
      for (Index i = 0; i < res.size(); ++i) order[i] = i;
      std::partial_sort(order.begin(), order.begin() + d, order.end(),
                        [&](Index a, Index b) { return std::abs(res(a)) < std::abs(res(b)); });
      Matrix xs(d, d);
      Vector ys(d);
      for (Index k = 0; k < d; ++k) {
        xs.row(k) = x.row(order[k]);
        ys(k) = y(order[k]);
      }
      Eigen::FullPivLU<Matrix> lu(xs);
      if (lu.rank() < d) break;
      const Vector candidate = lu.solve(ys);
      const double cand_obj = detail::weighted_l1(x * candidate - y, w);
      if (!(cand_obj < best_objective)) break;
      best_objective = cand_obj;
      best_beta = candidate;
    }
  }

  out.beta_aug = augment(best_beta);
  out.beta = std::move(best_beta);
  out.sketch_loss = best_objective;
  out.method = SolveMethod::irls;
  out.iterations = iter;
  return out;
}

inline constexpr Index kOracleMaxRows = 25;
inline constexpr Index kOracleMaxFeatures = 3;

// Exact weighted LAD by enumerating every d-row interpolation.
inline RegressionSolution lad_vertex_oracle(const SketchProblem& p) {
  detail::validate(p);
  const Index r = p.m.rows();
  const Index d = p.features();
  if (r > kOracleMaxRows || d > kOracleMaxFeatures) {
    throw ParameterError("lad_vertex_oracle: instance exceeds r <= 25, d <= 3");
  }
  if (r < d) throw SingularSystemError("lad_vertex_oracle: fewer rows than features");
  const Matrix x = p.m.leftCols(d);
  const Vector y = p.m.col(d);
  const Vector w = detail::weights_or_ones(p);

  std::vector<Index> pick(static_cast<std::size_t>(d));
  for (Index k = 0; k < d; ++k) pick[k] = k;
  double best = std::numeric_limits<double>::infinity();
  Vector best_beta;
  Matrix xs(d, d);
  Vector ys(d);
  while (true) {
    for (Index k = 0; k < d; ++k) {
      xs.row(k) = x.row(pick[k]);
      ys(k) = y(pick[k]);
    }
    Eigen::FullPivLU<Matrix> lu(xs);
    if (lu.rank() == d) {
      const Vector beta = lu.solve(ys);
      const double obj = detail::weighted_l1(x * beta - y, w);
      if (obj < best) {
        best = obj;
        best_beta = beta;
      }
    }
    // Next combination in lexicographic order.
    Index k = d - 1;
    while (k >= 0 && pick[k] == r - d + k) --k;
    if (k < 0) break;
    ++pick[k];
    for (Index j = k + 1; j < d; ++j) pick[j] = pick[j - 1] + 1;
  }
  if (!std::isfinite(best)) {
    throw SingularSystemError("lad_vertex_oracle: every row subset is singular");
  }
  return detail::make_solution(best_beta, best, SolveMethod::vertex_oracle);
}

inline double regression_loss(const Matrix& a, const Vector& beta_aug, Norm norm) {
  const Vector res = a * beta_aug;
  return norm == Norm::l2 ? res.squaredNorm() : res.lpNorm<1>();
}

struct ApproximationRatio {
  double value = 0.0;
  // Exact loss was (numerically) zero: value holds loss(sol) - loss(beta*).
  bool absolute_excess = false;
  double solution_loss = 0.0;
  double optimal_loss = 0.0;
};

// Exact minimiser on the full data: QR for l2, IRLS to tol 1e-12 for l1.
inline RegressionSolution exact_solution(const DataMatrix& data, Norm norm) {
  SketchProblem problem{data.matrix(), std::nullopt};
  if (norm == Norm::l2) return solve_l2_sketch(problem);
  IrlsOptions opt;
  opt.tol = 1e-12;
  opt.max_iter = 1000;
  return solve_l1_weighted(problem, opt);
}

// loss(sol on A) / loss(beta* on A), squared l2 or plain l1 loss.
inline ApproximationRatio approximation_ratio(const DataMatrix& data,
                                              const RegressionSolution& sol, Norm norm) {
  if (sol.beta_aug.size() != data.cols()) {
    throw DimensionError("approximation_ratio: solution dimension does not match data");
  }
  const RegressionSolution best = exact_solution(data, norm);
  ApproximationRatio out;
  out.solution_loss = regression_loss(data.matrix(), sol.beta_aug, norm);
  out.optimal_loss = regression_loss(data.matrix(), best.beta_aug, norm);
  const double scale = norm == Norm::l2 ? data.matrix().squaredNorm()
                                        : data.matrix().cwiseAbs().sum();
  if (out.optimal_loss <= 1e-14 * std::max(1.0, scale)) {
    out.absolute_excess = true;
    out.value = out.solution_loss - out.optimal_loss;
  } else {
    out.value = out.solution_loss / out.optimal_loss;
  }
  return out;
}

}  // namespace dpsketch
