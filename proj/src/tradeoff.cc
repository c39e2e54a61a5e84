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

#include "mia_audit/tradeoff.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "mia_audit/error.h"
#include "mia_audit/format.h"
#include "mia_audit/numerics.h"

namespace mia {
namespace {

void CheckScores(std::span<const double> out_scores,
                 std::span<const double> in_scores) {
  if (out_scores.empty() || in_scores.empty()) {
    throw InvalidArgument("trade-off curve needs non-empty out and in scores");
  }
  for (double v : out_scores) {
    if (std::isnan(v)) throw InvalidArgument("NaN score");
  }
  for (double v : in_scores) {
    if (std::isnan(v)) throw InvalidArgument("NaN score");
  }
}

std::vector<double> Sorted(std::span<const double> v) {
  std::vector<double> s(v.begin(), v.end());
  std::sort(s.begin(), s.end());
  return s;
}

// Keeps the smallest beta per alpha and sorts by alpha.
std::vector<TradeoffPoint> Compact(std::vector<TradeoffPoint> pts) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.alpha < b.alpha || (a.alpha == b.alpha && a.beta < b.beta);
  });
  std::vector<TradeoffPoint> out;
  for (const auto& p : pts) {
    if (!out.empty() && out.back().alpha == p.alpha) continue;
    // Dominated points add nothing to a right-continuous infimum.
    if (!out.empty() && p.beta > out.back().beta) continue;
    out.push_back(p);
  }
  return out;
}

std::vector<double> Breakpoints(const TradeoffCurve& a,
                                const TradeoffCurve& b) {
  std::vector<double> xs;
  for (const auto& p : a.points) xs.push_back(p.alpha);
  for (const auto& p : b.points) xs.push_back(p.alpha);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

Monotonicity Direction(const std::vector<double>& values,
                       const std::function<double(double)>& f) {
  if (values.size() < 2) return Monotonicity::kIncreasing;
  bool up = true;
  bool down = true;
  double prev = f(values[0]);
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double cur = f(values[i]);
    if (!(cur > prev)) up = false;
    if (!(cur < prev)) down = false;
    prev = cur;
  }
  if (up) return Monotonicity::kIncreasing;
  if (down) return Monotonicity::kDecreasing;
  return Monotonicity::kNone;
}

}  // namespace

double TradeoffCurve::BetaAt(double alpha) const {
  double beta = 1.0;
  for (const auto& p : points) {
    if (p.alpha > alpha) break;
    beta = std::min(beta, p.beta);
  }
  return beta;
}

TradeoffCurve EmpiricalTradeoff(std::span<const double> out_scores,
                                std::span<const double> in_scores) {
  CheckScores(out_scores, in_scores);
  const auto out = Sorted(out_scores);
  const auto in = Sorted(in_scores);
  const double n_out = static_cast<double>(out.size());
  const double n_in = static_cast<double>(in.size());

  std::vector<double> taus(out);
  taus.insert(taus.end(), in.begin(), in.end());
  std::sort(taus.begin(), taus.end());
  taus.erase(std::unique(taus.begin(), taus.end()), taus.end());

  std::vector<TradeoffPoint> pts;
  pts.push_back({1.0, 0.0});
  for (double tau : taus) {
    const auto out_le = std::upper_bound(out.begin(), out.end(), tau) - out.begin();
    const auto in_le = std::upper_bound(in.begin(), in.end(), tau) - in.begin();
    pts.push_back({(n_out - static_cast<double>(out_le)) / n_out,
                   static_cast<double>(in_le) / n_in});
  }
  return {Compact(std::move(pts)), "empirical"};
}

double GaussianTradeoff(double delta, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidArgument("alpha must lie in (0, 1)");
  }
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw InvalidArgument("delta must be finite and >= 0");
  }
  return NormalCdf(NormalQuantile(1.0 - alpha) - delta);
}

TradeoffCurve GaussianTradeoffCurve(double delta,
                                    std::span<const double> alphas) {
  std::vector<double> a(alphas.begin(), alphas.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  TradeoffCurve curve;
  curve.provenance = "analytic-gaussian(delta=" + FormatDouble(delta) + ";r=1)";
  for (double alpha : a) curve.points.push_back({alpha, GaussianTradeoff(delta, alpha)});
  return curve;
}

TradeoffCurve ExactDeterministicTradeoff(std::span<const double> out_scores,
                                         std::span<const double> in_scores) {
  CheckScores(out_scores, in_scores);
  std::vector<double> values(out_scores.begin(), out_scores.end());
  values.insert(values.end(), in_scores.begin(), in_scores.end());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  const std::size_t k = values.size();
  if (k > kMaxExactValues) {
    throw InvalidArgument("exact trade-off limited to " +
                          std::to_string(kMaxExactValues) + " distinct values");
  }
  auto index = [&](double v) {
    return std::lower_bound(values.begin(), values.end(), v) - values.begin();
  };
  std::vector<std::size_t> out_count(k, 0), in_count(k, 0);
  for (double v : out_scores) ++out_count[index(v)];
  for (double v : in_scores) ++in_count[index(v)];
  const double n_out = static_cast<double>(out_scores.size());
  const double n_in = static_cast<double>(in_scores.size());

  std::vector<TradeoffPoint> pts;
  for (std::uint32_t region = 0; region < (1u << k); ++region) {
    std::size_t out_rej = 0;
    std::size_t in_acc = 0;
    for (std::size_t i = 0; i < k; ++i) {
      if (region >> i & 1u) {
        out_rej += out_count[i];
      } else {
        in_acc += in_count[i];
      }
    }
    pts.push_back({static_cast<double>(out_rej) / n_out,
                   static_cast<double>(in_acc) / n_in});
  }
  return {Compact(std::move(pts)), "exact-deterministic"};
}

double CurveDiscrepancy(const TradeoffCurve& a, const TradeoffCurve& b) {
  double worst = 0.0;
  for (double x : Breakpoints(a, b)) {
    worst = std::max(worst, std::fabs(a.BetaAt(x) - b.BetaAt(x)));
  }
  return worst;
}

double DominanceGap(const TradeoffCurve& upper, const TradeoffCurve& lower) {
  double gap = std::numeric_limits<double>::infinity();
  for (double x : Breakpoints(upper, lower)) {
    gap = std::min(gap, upper.BetaAt(x) - lower.BetaAt(x));
  }
  return gap;
}

InvarianceCheck CheckPostprocessingInvariance(
    std::span<const double> out_scores, std::span<const double> in_scores,
    const std::function<double(double)>& transform, bool force) {
  CheckScores(out_scores, in_scores);
  std::vector<double> values(out_scores.begin(), out_scores.end());
  values.insert(values.end(), in_scores.begin(), in_scores.end());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());

  InvarianceCheck check;
  check.direction = Direction(values, transform);
  if (check.direction == Monotonicity::kNone && !force) {
    throw InvalidArgument("transform is not strictly monotone on the scores");
  }
  const double sign = check.direction == Monotonicity::kDecreasing ? -1.0 : 1.0;
  std::vector<double> out_t, in_t;
  for (double v : out_scores) out_t.push_back(sign * transform(v));
  for (double v : in_scores) in_t.push_back(sign * transform(v));

  const TradeoffCurve original = EmpiricalTradeoff(out_scores, in_scores);
  const TradeoffCurve mapped = EmpiricalTradeoff(out_t, in_t);
  check.discrepancy = CurveDiscrepancy(original, mapped);
  check.dominance_gap = std::numeric_limits<double>::quiet_NaN();
  if (check.direction == Monotonicity::kNone && values.size() <= kMaxExactValues) {
    check.dominance_gap =
        DominanceGap(mapped, ExactDeterministicTradeoff(out_scores, in_scores));
  }
  return check;
}

std::string TradeoffCurveCsv(const TradeoffCurve& curve, bool header) {
  std::string out = header ? "alpha,beta,provenance\n" : "";
  for (const auto& p : curve.points) {
    out += FormatDouble(p.alpha) + "," + FormatDouble(p.beta) + "," +
           curve.provenance + "\n";
  }
  return out;
}

}  // namespace mia
