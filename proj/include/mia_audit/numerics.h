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

#ifndef MIA_AUDIT_NUMERICS_H_
#define MIA_AUDIT_NUMERICS_H_

#include <cstdint>
#include <span>

namespace mia {

// Standard normal distribution function and its upper tail 1 - Phi(z),
// both accurate to about one ulp through std::erfc.
double NormalCdf(double z);
double NormalSf(double z);

// Phi^{-1}(p) for 0 < p < 1. Rational initial approximation polished by a
// Halley step; |Phi(result) - p| is at rounding level over [1e-300, 1).
double NormalQuantile(double p);

// Regularized incomplete beta I_x(a, b). `y` must equal 1 - x; passing it
// separately keeps precision when x is within rounding of 1.
double RegularizedIncompleteBeta(double a, double b, double x, double y);

// log Gamma(x + h) - log Gamma(x) without cancellation for large x.
double LogGammaDifference(double x, double h);

double StudentTCdf(double t, double df);
// Upper tail 1 - T_df(t).
double StudentTSf(double t, double df);
double StudentTPdf(double t, double df);
double StudentTQuantile(double p, double df);

struct StudentTFit {
  double df = 0.0;
  double scale = 0.0;
  double log_likelihood = 0.0;
  // False when the scale iteration failed to settle; df and scale then hold
  // the fallback (df = kMaxDf, scale = root mean square of the samples).
  bool converged = true;
};

// Maximum-likelihood fit of a location-0 Student-t to `samples`: a
// golden-section search over log(df) in [kMinDf, kMaxDf], with the scale
// profiled out by the EM fixed point for each candidate df.
// Requires at least 10 samples that are not all equal.
StudentTFit FitStudentT(std::span<const double> samples);

inline constexpr double kStudentTMinDf = 2.001;
inline constexpr double kStudentTMaxDf = 1e6;

// Order statistic sorted[ceil(p * n) - 1] of an ascending sequence.
double EmpiricalQuantile(std::span<const double> sorted, double p);

// Index form of the rule above, exposed for threshold selection.
std::size_t EmpiricalQuantileIndex(std::size_t n, double p);

// Running count, mean and sum of squared deviations (Welford), with an exact
// inverse for removing a previously added value.
class MomentAccumulator {
 public:
  MomentAccumulator() = default;

  void Add(double value);
  // Reverses Add(value). Requires count() >= 2.
  void Remove(double value);
  // Chan et al. pairwise combination.
  void Merge(const MomentAccumulator& other);

  std::int64_t count() const { return count_; }
  double mean() const { return mean_; }
  double m2() const { return m2_; }
  // Unbiased (n - 1) variance; NaN when count() < 2.
  double Variance() const;
  double StdDev() const;

 private:
  std::int64_t count_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

// Value-returning form of MomentAccumulator::Remove.
MomentAccumulator LooDowndate(MomentAccumulator acc, double value);

}  // namespace mia

#endif  // MIA_AUDIT_NUMERICS_H_
