//
// Copyright 2026 The mia-audit Authors
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

#include "mia_audit/numerics.h"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/distributions/students_t.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "mia_audit/error.h"

namespace mia {
namespace {

// Reference values from tests/oracles/scalar_oracles.py (mpmath, 40 digits).
TEST(NormalCdfTest, MatchesHighPrecisionReference) {
  EXPECT_NEAR(NormalCdf(1.6448536269514722), 0.9499999999999999469, 1e-16);
  EXPECT_NEAR(NormalCdf(0.25), 0.59870632568292372424, 1e-16);
  EXPECT_NEAR(NormalCdf(5.5), 0.99999998101043753411, 1e-16);
  EXPECT_NEAR(NormalCdf(-3.5) / 2.3262907903552503635e-4, 1.0, 1e-14);
  EXPECT_NEAR(NormalCdf(-8.0) / 6.2209605742717841235e-16, 1.0, 1e-13);
  EXPECT_DOUBLE_EQ(NormalCdf(0.0), 0.5);
}

TEST(NormalCdfTest, UpperTailIsMirror) {
  for (double z = -7.0; z <= 7.0; z += 0.37) {
    EXPECT_DOUBLE_EQ(NormalSf(z), NormalCdf(-z));
  }
}

TEST(NormalQuantileTest, MatchesHighPrecisionReference) {
  EXPECT_NEAR(NormalQuantile(0.95), 1.6448536269514727149, 1e-14);
  EXPECT_NEAR(NormalQuantile(1e-9), -5.9978070150076868716, 1e-12);
  EXPECT_NEAR(NormalQuantile(0.025), -1.9599639845400542355, 1e-14);
  EXPECT_NEAR(NormalQuantile(0.999999), 4.7534243088228989482, 1e-9);
  EXPECT_DOUBLE_EQ(NormalQuantile(0.5), 0.0);
}

// Near z = 6, one ulp of p = Phi(z) ~ 1 already moves z by ~1e-8, so the
// upper half is checked through the exact reflection Phi(-z) = 1 - Phi(z).
TEST(NormalQuantileTest, InvertsCdfOnWideRange) {
  for (int i = -6000; i <= 6000; ++i) {
    const double z = i / 1000.0;
    const double back = z <= 0.0 ? NormalQuantile(NormalCdf(z))
                                 : -NormalQuantile(NormalSf(z));
    EXPECT_NEAR(back, z, 1e-9) << z;
    const double p = NormalCdf(z);
    EXPECT_NEAR(NormalCdf(NormalQuantile(p)), p, 1e-15) << z;
  }
}

TEST(NormalQuantileTest, ReflectionIsExact) {
  for (double p : {1e-5, 0.01, 0.3, 0.49}) {
    EXPECT_EQ(NormalQuantile(1.0 - p), -NormalQuantile(1.0 - (1.0 - p)));
  }
}

TEST(NormalQuantileTest, RejectsOutsideUnitInterval) {
  EXPECT_THROW(NormalQuantile(0.0), InvalidArgument);
  EXPECT_THROW(NormalQuantile(1.0), InvalidArgument);
  EXPECT_THROW(NormalQuantile(std::nan("")), InvalidArgument);
}

TEST(IncompleteBetaTest, AgreesWithBoost) {
  for (double a : {0.5, 1.0, 2.5, 15.0, 400.0}) {
    for (double b : {0.5, 3.0, 50.0}) {
      for (double x : {1e-6, 0.1, 0.5, 0.9, 0.999}) {
        const double want = boost::math::ibeta(a, b, x);
        EXPECT_NEAR(RegularizedIncompleteBeta(a, b, x, 1.0 - x), want,
                    1e-13 + 1e-11 * want)
            << a << " " << b << " " << x;
      }
    }
  }
}

TEST(LogGammaDifferenceTest, AgreesWithLgammaAndStaysAccurateForLargeX) {
  EXPECT_NEAR(LogGammaDifference(3.0, 0.5), std::lgamma(3.5) - std::lgamma(3.0),
              1e-13);
  // log Gamma(x + 1/2) - log Gamma(x) ~ 0.5 log x - 1/(8x) for huge x.
  const double x = 1e12;
  EXPECT_NEAR(LogGammaDifference(x, 0.5), 0.5 * std::log(x) - 1.0 / (8.0 * x),
              1e-12);
}

TEST(StudentTQuantileTest, MatchesHighPrecisionReference) {
  EXPECT_NEAR(StudentTQuantile(0.95, 1.0), 6.313751514675043099, 1e-10);
  EXPECT_NEAR(StudentTQuantile(0.95, 2.5), 2.5582186141359366234, 1e-11);
  EXPECT_NEAR(StudentTQuantile(0.999, 5.0), 5.8934295313560101276, 1e-10);
  EXPECT_NEAR(StudentTQuantile(0.01, 30.0), -2.4572615424005913725, 1e-11);
  EXPECT_NEAR(StudentTQuantile(0.9, 1000.0), 1.2823987214609244373, 1e-11);
  EXPECT_NEAR(StudentTQuantile(0.999, 0.5) / 102849.11563017555403, 1.0,
              1e-8);
}

TEST(StudentTQuantileTest, CauchyClosedFormAtOneDegreeOfFreedom) {
  for (double p = 0.001; p < 1.0; p += 0.00731) {
    const double want = std::tan(std::numbers::pi * (p - 0.5));
    EXPECT_NEAR(StudentTQuantile(p, 1.0), want, 1e-8 * std::max(1.0, std::fabs(want)))
        << p;
  }
}

TEST(StudentTTest, CdfAndQuantileAgreeWithBoost) {
  for (double df : {1.0, 2.0, 3.7, 10.0, 120.0, 1e5}) {
    boost::math::students_t dist(df);
    for (double t : {-40.0, -3.0, -0.4, 0.0, 0.8, 2.5, 12.0}) {
      EXPECT_NEAR(StudentTCdf(t, df), boost::math::cdf(dist, t), 1e-13)
          << df << " " << t;
      EXPECT_NEAR(StudentTPdf(t, df), boost::math::pdf(dist, t), 1e-13);
    }
    for (double p : {1e-6, 0.01, 0.3, 0.5, 0.77, 0.999}) {
      const double want = boost::math::quantile(dist, p);
      EXPECT_NEAR(StudentTQuantile(p, df), want, 1e-9 * std::max(1.0, std::fabs(want)))
          << df << " " << p;
    }
  }
}

TEST(StudentTTest, LargeDfApproachesNormal) {
  EXPECT_NEAR(StudentTQuantile(0.999, 1e6), NormalQuantile(0.999), 1e-5);
}

TEST(FitStudentTTest, RecoversHeavyTailAndScale) {
  std::mt19937_64 gen(5);
  std::student_t_distribution<double> t(4.0);
  std::vector<double> xs(200000);
  for (double& x : xs) x = 2.0 * t(gen);
  const StudentTFit fit = FitStudentT(xs);
  EXPECT_TRUE(fit.converged);
  EXPECT_NEAR(fit.df, 4.0, 0.2);
  EXPECT_NEAR(fit.scale, 2.0, 0.03);
}

TEST(FitStudentTTest, GaussianDataPushesDfHigh) {
  std::mt19937_64 gen(6);
  std::normal_distribution<double> n(0.0, 1.5);
  std::vector<double> xs(100000);
  for (double& x : xs) x = n(gen);
  const StudentTFit fit = FitStudentT(xs);
  EXPECT_GT(fit.df, 100.0);
  EXPECT_NEAR(fit.scale, 1.5, 0.03);
}

TEST(FitStudentTTest, RejectsTooFewOrConstantSamples) {
  std::vector<double> few(9, 1.0);
  EXPECT_THROW(FitStudentT(few), InvalidArgument);
  std::vector<double> flat(50, 3.0);
  EXPECT_THROW(FitStudentT(flat), InvalidArgument);
}

TEST(EmpiricalQuantileTest, SelectsCeilOrderStatistic) {
  const std::vector<double> v = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  EXPECT_EQ(EmpiricalQuantile(v, 0.9), 9.0);
  EXPECT_EQ(EmpiricalQuantile(v, 0.91), 10.0);
  EXPECT_EQ(EmpiricalQuantile(v, 0.05), 1.0);
  // 1 - 0.7 is not exactly 0.3 in binary; the index still snaps.
  EXPECT_EQ(EmpiricalQuantileIndex(10, 1.0 - 0.7), 2u);
  EXPECT_EQ(EmpiricalQuantileIndex(1000, 1.0 - 0.001), 998u);
}

TEST(MomentAccumulatorTest, MatchesTwoPassAndRemovesExactly) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> n(100.0, 3.0);
  std::vector<double> xs(500);
  for (double& x : xs) x = n(gen);
  MomentAccumulator acc;
  for (double x : xs) acc.Add(x);
  for (std::size_t drop : {0u, 17u, 499u}) {
    std::vector<double> rest;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i != drop) rest.push_back(xs[i]);
    }
    double mean = 0.0;
    for (double x : rest) mean += x;
    mean /= rest.size();
    double ss = 0.0;
    for (double x : rest) ss += (x - mean) * (x - mean);
    const MomentAccumulator loo = LooDowndate(acc, xs[drop]);
    EXPECT_EQ(loo.count(), 499);
    EXPECT_NEAR(loo.mean(), mean, 1e-12 * std::fabs(mean));
    EXPECT_NEAR(loo.Variance(), ss / 498.0, 1e-9 * ss / 498.0);
  }
}

TEST(MomentAccumulatorTest, MergeEqualsSequential) {
  MomentAccumulator a, b, all;
  for (int i = 0; i < 10; ++i) {
    a.Add(i * 0.5);
    all.Add(i * 0.5);
  }
  for (int i = 0; i < 7; ++i) {
    b.Add(3.0 - i);
    all.Add(3.0 - i);
  }
  a.Merge(b);
  EXPECT_EQ(a.count(), all.count());
  EXPECT_NEAR(a.mean(), all.mean(), 1e-14);
  EXPECT_NEAR(a.Variance(), all.Variance(), 1e-13);
}

TEST(MomentAccumulatorTest, SmallCounts) {
  MomentAccumulator acc;
  EXPECT_TRUE(std::isnan(acc.Variance()));
  acc.Add(2.0);
  EXPECT_TRUE(std::isnan(acc.Variance()));
  EXPECT_THROW(acc.Remove(2.0), InvalidArgument);
}

}  // namespace
}  // namespace mia
