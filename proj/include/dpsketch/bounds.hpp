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

// Bounds on the regularisation term ||eta beta_aug|| that privacy noise adds
// to the sketched regression problems, and a Monte Carlo verifier for tail
// claims of the form Pr(statistic >= bound) <= threshold.
//
// Every "log" in these bounds is the natural logarithm.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <variant>

#include "dpsketch/error.hpp"
#include "dpsketch/linalg.hpp"
#include "dpsketch/mechanisms.hpp"
#include "dpsketch/parallel.hpp"
#include "dpsketch/random.hpp"

namespace dpsketch {

namespace detail {

inline double log_factor(Index rows, const char* what) {
  if (rows < 2) throw ParameterError(std::string(what) + ": r must be >= 2");
  const double r = static_cast<double>(rows);
  return r * std::log(r);
}

}  // namespace detail

// 13B/eps * sqrt(r ln r ln(1.25/delta)) * ||beta_aug||_2. The constant 13
// rounds sqrt(8 ln 16 * 8) = 13.3 from the Gaussian concentration step.
inline double ridge_coeff_bound_l2(RowBound bound, const PrivacyParams& pp, Index rows,
                                   const Vector& beta_aug) {
  const double rlogr = detail::log_factor(rows, "ridge_coeff_bound_l2");
  return 13.0 * bound.value() / pp.epsilon() *
         std::sqrt(rlogr * std::log(1.25 / pp.delta())) * beta_aug.norm();
}

// 2B r ln r sqrt(2 ln(1.25/delta)) / eps * ||beta_aug||_1.
inline double l1_coeff_bound_simple(RowBound bound, const PrivacyParams& pp, Index rows,
                                    const Vector& beta_aug) {
  const double rlogr = detail::log_factor(rows, "l1_coeff_bound_simple");
  return 2.0 * bound.value() * rlogr * std::sqrt(2.0 * std::log(1.25 / pp.delta())) /
         pp.epsilon() * beta_aug.lpNorm<1>();
}

// 2B r ln r sqrt(2 h_m ln(1.25/delta)) / eps * ||beta_aug||_1.
inline double l1_coeff_bound_multilevel(RowBound bound, const PrivacyParams& pp, Index rows,
                                        std::size_t levels, const Vector& beta_aug) {
  if (levels < 1) throw ParameterError("l1_coeff_bound_multilevel: h_m must be >= 1");
  const double rlogr = detail::log_factor(rows, "l1_coeff_bound_multilevel");
  return 2.0 * bound.value() * rlogr *
         std::sqrt(2.0 * static_cast<double>(levels) * std::log(1.25 / pp.delta())) /
         pp.epsilon() * beta_aug.lpNorm<1>();
}

// Noise rows the tail bounds are stated for: ceil(r ln r).
inline Index log_noise_rows(Index rows) {
  return static_cast<Index>(std::ceil(detail::log_factor(rows, "log_noise_rows")));
}

struct BoundReport {
  std::string bound_name;
  double analytic_value = 0.0;
  std::size_t trials = 0;
  std::size_t exceedances = 0;
  double threshold_prob = 0.0;
  bool passed = false;
  // Reported for context; not part of a suite's verdict.
  bool informational = false;

  double exceedance_rate() const {
    return trials == 0 ? 0.0 : static_cast<double>(exceedances) / static_cast<double>(trials);
  }
};

// exceedances/trials <= threshold + 2 sqrt(threshold / trials).
inline bool binomial_verdict(std::size_t exceedances, std::size_t trials, double threshold) {
  const double t = static_cast<double>(trials);
  return static_cast<double>(exceedances) / t <= threshold + 2.0 * std::sqrt(threshold / t);
}

inline BoundReport make_report(std::string name, double analytic, std::size_t trials,
                               std::size_t exceedances, double threshold) {
  BoundReport r;
  r.bound_name = std::move(name);
  r.analytic_value = analytic;
  r.trials = trials;
  r.exceedances = exceedances;
  r.threshold_prob = threshold;
  r.passed = binomial_verdict(exceedances, trials, threshold);
  return r;
}

// `count` i.i.d. N(0, sigma^2) values.
struct IidGaussianSampler {
  Index count = 0;
  double sigma = 0.0;
};

// eta * beta_aug for eta a rows x beta_aug.size() matrix of i.i.d.
// N(0, sigma^2) entries.
struct GaussianProjectionSampler {
  Index rows = 0;
  double sigma = 0.0;
  Vector beta_aug;
};

using TailSampler = std::variant<IidGaussianSampler, GaussianProjectionSampler>;

enum class TailStatistic { l1_norm, l2_norm };

inline Vector draw(const IidGaussianSampler& s, Rng& rng) {
  Vector v(s.count);
  for (Index i = 0; i < s.count; ++i) v(i) = rng.gaussian(s.sigma);
  return v;
}

inline Vector draw(const GaussianProjectionSampler& s, Rng& rng) {
  const Index cols = s.beta_aug.size();
  Vector out(s.rows);
  for (Index i = 0; i < s.rows; ++i) {
    double acc = 0.0;
    for (Index j = 0; j < cols; ++j) acc += rng.gaussian(s.sigma) * s.beta_aug(j);
    out(i) = acc;
  }
  return out;
}

inline constexpr std::size_t kMinTrials = 100;

// Samples the statistic `trials` times (trial t uses sub-seed t of `seed`)
// and counts how often it reaches `bound`.
inline BoundReport verify_tail_bound(const TailSampler& sampler, TailStatistic statistic,
                                     double bound, double threshold_prob, std::size_t trials,
                                     std::uint64_t seed, std::string name = "tail-bound") {
  if (trials < kMinTrials) {
    throw ParameterError("verify_tail_bound: at least " + std::to_string(kMinTrials) +
                         " trials are required");
  }
  if (!(threshold_prob >= 0.0 && threshold_prob <= 1.0)) {
    throw ParameterError("verify_tail_bound: threshold must lie in [0, 1]");
  }
  std::atomic<std::size_t> hits{0};
  parallel_for(trials, [&](std::size_t t) {
    Rng rng(derive_seed(seed, t));
    const Vector v = std::visit([&](const auto& s) { return draw(s, rng); }, sampler);
    const double stat = statistic == TailStatistic::l1_norm ? v.lpNorm<1>() : v.norm();
    if (stat >= bound) ++hits;
  });
  return make_report(std::move(name), bound, trials, hits.load(), threshold_prob);
}

}  // namespace dpsketch
