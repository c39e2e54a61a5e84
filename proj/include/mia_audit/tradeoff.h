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

#ifndef MIA_AUDIT_TRADEOFF_H_
#define MIA_AUDIT_TRADEOFF_H_

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace mia {

struct TradeoffPoint {
  double alpha = 0.0;  // type-I error (FPR)
  double beta = 0.0;   // type-II error (FNR)
};

// Step curve through achievable operating points; alpha strictly
// increasing, beta nonincreasing.
struct TradeoffCurve {
  std::vector<TradeoffPoint> points;
  std::string provenance;

  // Right-continuous step evaluation: smallest beta among points with
  // point.alpha <= alpha, 1 left of the first point.
  double BetaAt(double alpha) const;
};

// All threshold rules "reject (call member) when score > tau", tau running
// over -inf and every observed value. Includes (1, 0) and a point at
// alpha = 0.
TradeoffCurve EmpiricalTradeoff(std::span<const double> out_scores,
                                std::span<const double> in_scores);

// Beta of the best test between N(0, 1) and N(delta, 1):
// Phi(Phi^{-1}(1 - alpha) - delta).
double GaussianTradeoff(double delta, double alpha);
TradeoffCurve GaussianTradeoffCurve(double delta,
                                    std::span<const double> alphas);

// Best beta per alpha over every deterministic rejection region, not only
// thresholds. Exhaustive over subsets of the distinct values, so limited to
// kMaxExactValues of them.
inline constexpr std::size_t kMaxExactValues = 16;
TradeoffCurve ExactDeterministicTradeoff(std::span<const double> out_scores,
                                         std::span<const double> in_scores);

// Max |beta_a(alpha) - beta_b(alpha)| over the union of both breakpoints.
double CurveDiscrepancy(const TradeoffCurve& a, const TradeoffCurve& b);

// min (beta_upper - beta_lower) over the union of breakpoints; >= 0 when
// `upper` never dips below `lower`.
double DominanceGap(const TradeoffCurve& upper, const TradeoffCurve& lower);

enum class Monotonicity { kIncreasing, kDecreasing, kNone };

struct InvarianceCheck {
  Monotonicity direction = Monotonicity::kNone;
  // Against the empirical curve of the original scores. Decreasing maps
  // are compared after negating the transformed scores.
  double discrepancy = 0.0;
  // Transformed empirical curve minus the exact deterministic curve of the
  // original scores; only filled for forced non-monotone maps with at most
  // kMaxExactValues distinct values, NaN otherwise.
  double dominance_gap = 0.0;
};

// Monotonicity is checked on the sorted distinct input values. A map that
// is not strictly monotone there throws InvalidArgument unless `force`.
InvarianceCheck CheckPostprocessingInvariance(
    std::span<const double> out_scores, std::span<const double> in_scores,
    const std::function<double(double)>& transform, bool force = false);

// Columns: alpha, beta, provenance.
std::string TradeoffCurveCsv(const TradeoffCurve& curve, bool header = true);

}  // namespace mia

#endif  // MIA_AUDIT_TRADEOFF_H_
