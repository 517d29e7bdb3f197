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
#include "dpsketch/bounds.hpp"

#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "dpsketch/verify.hpp"

namespace dpsketch {
namespace {

const PrivacyParams kPp(1.0, 0.05);
const RowBound kUnit(1.0);

Vector unit_axis(Index size) {
  Vector v = Vector::Zero(size);
  v(0) = 1.0;
  return v;
}

TEST(RidgeBoundTest, Example) {
  const long double oracle =
      13.0L * std::sqrt(8.0L * std::log(8.0L) * std::log(25.0L));
  const double got = ridge_coeff_bound_l2(kUnit, kPp, 8, unit_axis(3));
  EXPECT_NEAR(got / static_cast<double>(oracle), 1.0, 1e-12);
  EXPECT_NEAR(got, 95.1, 0.05);
  EXPECT_NEAR(ridge_coeff_bound_l2(kUnit, kPp, 8, 2.0 * unit_axis(3)), 2.0 * got, 1e-12);
  EXPECT_THROW(ridge_coeff_bound_l2(kUnit, kPp, 1, unit_axis(3)), ParameterError);
}

TEST(L1SimpleBoundTest, Example) {
  const long double oracle =
      2.0L * 8.0L * std::log(8.0L) * std::sqrt(2.0L * std::log(25.0L));
  const double got = l1_coeff_bound_simple(kUnit, kPp, 8, unit_axis(2));
  EXPECT_NEAR(got / static_cast<double>(oracle), 1.0, 1e-12);
  EXPECT_NEAR(got, 84.4, 0.05);
  EXPECT_NEAR(l1_coeff_bound_simple(kUnit, PrivacyParams(2.0, 0.05), 8, unit_axis(2)), got / 2.0,
              1e-12);
  EXPECT_THROW(l1_coeff_bound_simple(kUnit, kPp, 0, unit_axis(2)), ParameterError);
}

TEST(L1MultilevelBoundTest, Example) {
  const double simple = l1_coeff_bound_simple(kUnit, kPp, 8, unit_axis(2));
  EXPECT_NEAR(l1_coeff_bound_multilevel(kUnit, kPp, 8, 1, unit_axis(2)), simple, 1e-12);
  const double four = l1_coeff_bound_multilevel(kUnit, kPp, 8, 4, unit_axis(2));
  EXPECT_NEAR(four, 168.8, 0.05);
  EXPECT_NEAR(four / simple, 2.0, 1e-14);
  double previous = 0.0;
  for (std::size_t h = 1; h < 20; ++h) {
    const double v = l1_coeff_bound_multilevel(kUnit, kPp, 8, h, unit_axis(2));
    EXPECT_GT(v, previous);
    previous = v;
  }
  EXPECT_THROW(l1_coeff_bound_multilevel(kUnit, kPp, 8, 0, unit_axis(2)), ParameterError);
}

TEST(BoundsTest, HomogeneityOnGrid) {
  Vector beta(3);
  beta << 0.3, -0.7, -1.0;
  for (double b : {0.5, 1.0, 3.0}) {
    for (double e : {0.25, 1.0, 4.0}) {
      for (Index r : {2, 8, 100}) {
        const PrivacyParams pp(e, 0.01);
        const PrivacyParams pp2(2.0 * e, 0.01);
        const RowBound rb(b);
        const RowBound rb2(2.0 * b);
        const Vector beta2 = 2.0 * beta;
        const auto check = [&](auto f) {
          const double base = f(rb, pp, beta);
          EXPECT_NEAR(f(rb2, pp, beta) / base, 2.0, 1e-12);
          EXPECT_NEAR(f(rb, pp, beta2) / base, 2.0, 1e-12);
          EXPECT_NEAR(f(rb, pp2, beta) / base, 0.5, 1e-12);
        };
        check([&](RowBound x, const PrivacyParams& p, const Vector& v) {
          return ridge_coeff_bound_l2(x, p, r, v);
        });
        check([&](RowBound x, const PrivacyParams& p, const Vector& v) {
          return l1_coeff_bound_simple(x, p, r, v);
        });
        check([&](RowBound x, const PrivacyParams& p, const Vector& v) {
          return l1_coeff_bound_multilevel(x, p, r, 3, v);
        });
      }
    }
  }
}

TEST(LogNoiseRowsTest, Values) {
  EXPECT_EQ(log_noise_rows(2), 2);
  EXPECT_EQ(log_noise_rows(10), 24);
  EXPECT_EQ(log_noise_rows(100), 461);
}

TEST(BinomialVerdictTest, SlackIsTwoSigma) {
  // 0.25 + 2 sqrt(0.25 / 10000) = 0.26
  EXPECT_TRUE(binomial_verdict(2600, 10000, 0.25));
  EXPECT_FALSE(binomial_verdict(2601, 10000, 0.25));
  EXPECT_TRUE(binomial_verdict(0, 100, 0.0));
  EXPECT_FALSE(binomial_verdict(1, 100, 0.0));
  const BoundReport r = make_report("x", 1.0, 200, 10, 0.25);
  EXPECT_TRUE(r.passed);
  EXPECT_DOUBLE_EQ(r.exceedance_rate(), 0.05);
}

TEST(VerifyTailBoundTest, Examples) {
  const IidGaussianSampler s{50, 1.0};
  const BoundReport inf = verify_tail_bound(s, TailStatistic::l1_norm,
                                            std::numeric_limits<double>::infinity(), 0.25, 1000, 1);
  EXPECT_EQ(inf.exceedances, 0u);
  EXPECT_TRUE(inf.passed);
  const BoundReport zero = verify_tail_bound(s, TailStatistic::l1_norm, 0.0, 0.25, 1000, 1);
  EXPECT_EQ(zero.exceedances, 1000u);
  EXPECT_FALSE(zero.passed);
  const BoundReport lemma = verify_tail_bound(s, TailStatistic::l1_norm, 50.0, 0.25, 10000, 2);
  EXPECT_TRUE(lemma.passed);
  EXPECT_LT(lemma.exceedance_rate(), 0.05);
  EXPECT_THROW(verify_tail_bound(s, TailStatistic::l1_norm, 1.0, 0.25, 99, 1), ParameterError);
  EXPECT_THROW(verify_tail_bound(s, TailStatistic::l1_norm, 1.0, 1.5, 100, 1), ParameterError);
}

TEST(VerifyTailBoundTest, MeanOfAbsoluteSumMatchesHalfNormal) {
  // E sum |u_i| = r sigma sqrt(2/pi) = 39.89 for r = 50: the median sits
  // near there, so a bound of 39.89 is exceeded about half the time.
  const IidGaussianSampler s{50, 1.0};
  const double mean = 50.0 * std::sqrt(2.0 / M_PI);
  const BoundReport r = verify_tail_bound(s, TailStatistic::l1_norm, mean, 0.5, 10000, 3);
  EXPECT_NEAR(r.exceedance_rate(), 0.5, 0.03);
}

TEST(VerifyTailBoundTest, ProjectionSamplerScalesWithBetaNorm) {
  // eta beta has i.i.d. N(0, sigma^2 ||beta||^2) entries.
  Vector beta(4);
  beta << 1.0, 2.0, -2.0, -1.0;  // norm sqrt(10)
  const GaussianProjectionSampler s{40, 1.5, beta};
  const double chi_mean = 1.5 * std::sqrt(10.0) * std::sqrt(40.0 - 0.5);
  const BoundReport r = verify_tail_bound(s, TailStatistic::l2_norm, chi_mean, 0.5, 4000, 4);
  EXPECT_NEAR(r.exceedance_rate(), 0.5, 0.05);
}

TEST(VerifyTailBoundTest, ScheduleIndependent) {
  const IidGaussianSampler s{20, 1.0};
  const BoundReport a = verify_tail_bound(s, TailStatistic::l1_norm, 16.0, 0.5, 2000, 9);
  const BoundReport b = verify_tail_bound(s, TailStatistic::l1_norm, 16.0, 0.5, 2000, 9);
  EXPECT_EQ(a.exceedances, b.exceedances);
}

TEST(SuitesTest, TailSuitesPass) {
  for (const std::string name : {"lemma1", "thm1", "lemma2", "thm2"}) {
    const SuiteResult res = run_suite(name, 2000, 5);
    EXPECT_TRUE(res.passed()) << name;
    EXPECT_FALSE(res.reports.empty()) << name;
  }
}

TEST(SuitesTest, RejectsBadArguments) {
  EXPECT_THROW(run_suite("lemma1", 10, 0), UsageError);
  EXPECT_THROW(run_suite("nope", 1000, 0), UsageError);
}

}  // namespace
}  // namespace dpsketch
