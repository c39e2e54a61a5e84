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

// Acceptance suite: one [PASS]/[FAIL] line per criterion. Exit status is 0
// only when every criterion passes.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "mia_audit/calibration.h"
#include "mia_audit/fp_sim.h"
#include "mia_audit/grid.h"
#include "mia_audit/numerics.h"
#include "mia_audit/shadow_stats.h"
#include "mia_audit/synthetic.h"
#include "mia_audit/tradeoff.h"

namespace mia {
namespace {

int failures = 0;

void Report(bool ok, const std::string& name, const std::string& detail) {
  std::printf("[%s] %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string Fmt(const char* fmt, double a, double b = 0, double c = 0,
                double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), fmt, a, b, c, d);
  return buf;
}

bool Within(double v, double lo, double hi) { return v >= lo && v <= hi; }

struct SweepPoint {
  double ratio;
  RatioSummary raw;
  RatioSummary corrected;
};

SweepPoint RunSim(std::int64_t n_train) {
  SimConfig c;
  c.n_full = 1000;
  c.n_train = n_train;
  c.dim = 500;
  c.sigma = 1.0;
  c.n_models = 2048;
  c.seed = 7;
  const SimOutput out = Simulate(c);
  const SimResult corrected = BuildSimResult(
      c, SimNorms(out.grid),
      ApplyFpc(EstimateStats(out.grid), c.n_train, c.n_full));
  return {static_cast<double>(n_train) / 1000.0, SummarizeRatios(out.result),
          SummarizeRatios(corrected)};
}

void FinitePopulationBiasAndSweep() {
  const auto start = std::chrono::steady_clock::now();
  const SweepPoint half = RunSim(500);
  const double secs = std::chrono::duration<double>(
                          std::chrono::steady_clock::now() - start)
                          .count();
  const bool raw_ok = Within(half.raw.mean_ratio_in, 0.677, 0.737) &&
                      Within(half.raw.mean_ratio_out, 0.677, 0.737);
  const bool fixed_ok = Within(half.corrected.mean_ratio_in, 0.95, 1.05) &&
                        Within(half.corrected.mean_ratio_out, 0.95, 1.05);
  Report(raw_ok && fixed_ok && secs < 120.0, "finite-population-bias",
         Fmt("M=2048 N+=1000 N=500 d=500: ratio in=%.4f out=%.4f "
             "(want [0.677,0.737]); FPC-corrected in=%.4f ",
             half.raw.mean_ratio_in, half.raw.mean_ratio_out,
             half.corrected.mean_ratio_in) +
             Fmt("out=%.4f (want [0.95,1.05]); %.1fs (want < 120s)",
                 half.corrected.mean_ratio_out, secs));

  std::vector<SweepPoint> sweep = {RunSim(125), RunSim(250), half, RunSim(750)};
  const double want_lo = std::sqrt(0.875);
  const double want_hi = std::sqrt(0.25);
  const bool ends_ok =
      std::fabs(sweep[0].raw.mean_ratio_in - want_lo) <= 0.03 &&
      std::fabs(sweep[0].raw.mean_ratio_out - want_lo) <= 0.03 &&
      std::fabs(sweep[3].raw.mean_ratio_in - want_hi) <= 0.03 &&
      std::fabs(sweep[3].raw.mean_ratio_out - want_hi) <= 0.03;
  bool decreasing = true;
  std::string trail;
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    if (i > 0) {
      decreasing = decreasing &&
                   sweep[i].raw.mean_ratio_in < sweep[i - 1].raw.mean_ratio_in &&
                   sweep[i].raw.mean_ratio_out < sweep[i - 1].raw.mean_ratio_out;
    }
    trail += Fmt(" %.3f->(in %.4f, out %.4f)", sweep[i].ratio,
                 sweep[i].raw.mean_ratio_in, sweep[i].raw.mean_ratio_out);
  }
  Report(ends_ok && decreasing, "subsampling-sweep",
         "N/N+" + trail +
             Fmt("; want %.4f and %.4f +-0.03 at the ends, strictly "
                 "decreasing",
                 want_lo, want_hi));
}

MiaGrid RandomGrid(std::mt19937_64& gen, std::size_t m, std::size_t n) {
  std::uniform_real_distribution<double> u(0.05, 0.95);
  std::normal_distribution<double> z;
  std::vector<double> sd(n), p(n);
  for (std::size_t x = 0; x < n; ++x) {
    sd[x] = std::exp(2.0 * z(gen));
    p[x] = u(gen);
  }
  std::vector<double> s(m * n);
  std::vector<std::uint8_t> k(m * n);
  for (std::size_t r = 0; r < m; ++r) {
    for (std::size_t x = 0; x < n; ++x) {
      k[r * n + x] = std::bernoulli_distribution(p[x])(gen);
      s[r * n + x] = sd[x] * (z(gen) + k[r * n + x]);
    }
  }
  return MiaGrid(m, n, std::move(s), std::move(k));
}

void PooledFprIdentity() {
  std::mt19937_64 gen(2024);
  double worst = 0.0;
  int checks = 0;
  for (int g = 0; g < 100; ++g) {
    const std::size_t m = std::uniform_int_distribution<std::size_t>(2, 64)(gen);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 32)(gen);
    const MiaGrid grid = RandomGrid(gen, m, n);
    std::vector<double> all(grid.scores().begin(), grid.scores().end());
    for (int t = 0; t < 10; ++t) {
      double tau = all[std::uniform_int_distribution<std::size_t>(
          0, all.size() - 1)(gen)];
      if (t % 2) tau += std::normal_distribution<double>()(gen);
      bool has_out = false;
      for (auto k : grid.mask()) has_out = has_out || k == 0;
      if (!has_out) continue;
      const DecompositionCheck d = ConcatDecompositionCheck(grid, tau);
      worst = std::max(worst, std::fabs(d.pooled_fpr - d.weighted_mean_fpr));
      ++checks;
    }
  }
  Report(worst <= 1e-12 && checks >= 900, "pooled-fpr-identity",
         Fmt("%.0f (grid, threshold) pairs, max |pooled FPR - n_out-weighted "
             "mean FPR_x| = %.3g (want <= 1e-12)",
             checks, worst));
}


MiaGrid HeterogeneousGrid() {
  SyntheticConfig c;
  c.models = 4096;
  c.samples = 1000;
  c.membership_prob = 0.5;
  c.seed = 11;
  return HeterogeneousLiraGrid(c, 0.1, 10.0);
}

double SampleVariance(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= v.size();
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / (v.size() - 1);
}

void CalibrationAndOrdering(const MiaGrid& grid) {
  const double alphas[] = {0.001, 0.01, 0.1};
  {
    const CalibratedGrid cal = Calibrate(grid, {});
    const Evaluator ev(cal);
    bool ok = true;
    std::string detail = "M=4096 N=1000 LOO;";
    for (double a : alphas) {
      const auto naive = ev.PerSampleFpr(Strategy::kConcatNaive, a);
      const auto pp = ev.PerSampleFpr(Strategy::kConcatPP, a);
      const double v_naive = SampleVariance(naive);
      const double v_pp = SampleVariance(pp);
      double over = 0;
      for (double f : pp) over += f > 2 * a;
      over /= pp.size();
      ok = ok && v_pp < v_naive && over < 0.05;
      detail += Fmt(" a=%g: var pp=%.3g naive=%.3g, frac(FPR_x>2a)=%.4f;", a,
                    v_pp, v_naive, over);
    }
    Report(ok, "calibration-property",
           detail + " want var pp < var naive and frac < 0.05 at every alpha");
  }
  bool ok = true;
  std::string detail;
  for (std::size_t m : {512u, 1024u, 2048u, 4096u}) {
    CalibrationOptions opts;
    opts.target_models = m;
    const Evaluator ev(Calibrate(grid, opts));
    detail += " M=" + std::to_string(m) + ":";
    for (double a : alphas) {
      const EvalRow naive = ev.Evaluate(Strategy::kConcatNaive, a);
      const EvalRow pp = ev.Evaluate(Strategy::kConcatPP, a);
      ok = ok && naive.tpr >= pp.tpr;
      detail += Fmt(" %g->%.4f/%.4f", a, naive.tpr, pp.tpr);
    }
  }
  Report(ok, "ordering-naive-over-pp",
         "TPR naive/pp" + detail + "; want naive >= pp everywhere");
}

void GaussianClosedForm() {
  SyntheticConfig c;
  c.models = 4096;
  c.samples = 200;
  c.membership_prob = 0.5;
  c.seed = 13;
  const MiaGrid grid = EqualVarianceGrid(c, 2.0);
  const Evaluator ev(Calibrate(grid, {}));
  const double want = NormalSf(NormalQuantile(0.95) - 2.0);
  const EvalRow normal = ev.Evaluate(Strategy::kConcatPPNormal, 0.05);
  const EvalRow pp = ev.Evaluate(Strategy::kConcatPP, 0.05);
  const EvalRow avg = ev.Evaluate(Strategy::kAvgPerSample, 0.05);
  const bool ok = std::fabs(normal.tpr - want) <= 0.02 &&
                  std::fabs(avg.tpr - pp.tpr) <= 0.02;
  Report(ok, "gaussian-closed-form",
         Fmt("delta=2 M=4096 alpha=0.05: pp-normal TPR=%.4f vs %.4f (+-0.02); "
             "per-sample TPR=%.4f vs pp TPR=%.4f (+-0.02)",
             normal.tpr, want, avg.tpr, pp.tpr));
}

void TradeoffInvariance() {
  std::mt19937_64 gen(77);
  const std::vector<std::function<double(double)>> transforms = {
      [](double t) { return 2.0 * t + 3.0; },
      [](double t) { return t * t * t; },
      [](double t) { return std::exp(t); },
      [](double t) { return std::atan(t); },
      [](double t) { return t + t * t * t; },
      [](double t) { return std::sinh(t); },
      [](double t) { return std::log1p(std::exp(t)); },
      [](double t) { return 1.0 / (1.0 + std::exp(-t)); },
      [](double t) { return std::cbrt(t) - 7.0; },
      [](double t) { return 0.001 * t; },
  };
  double worst = 0.0;
  int pairs = 0;
  for (int set = 0; set < 50; ++set) {
    const std::size_t n_out = std::uniform_int_distribution<std::size_t>(1, 300)(gen);
    const std::size_t n_in = std::uniform_int_distribution<std::size_t>(1, 300)(gen);
    const double shift = std::uniform_real_distribution<double>(0, 2)(gen);
    std::normal_distribution<double> z;
    std::vector<double> out(n_out), in(n_in);
    // Every fourth set is rounded to create ties.
    auto draw = [&](double mu) {
      const double v = mu + z(gen);
      return set % 4 == 0 ? std::round(v * 4.0) / 4.0 : v;
    };
    for (double& v : out) v = draw(0.0);
    for (double& v : in) v = draw(shift);
    for (const auto& f : transforms) {
      const InvarianceCheck c = CheckPostprocessingInvariance(out, in, f);
      worst = std::max(worst, c.discrepancy);
      ++pairs;
    }
  }
  Report(worst == 0.0 && pairs == 500, "tradeoff-invariance",
         Fmt("%.0f (score set, increasing map) pairs, max pointwise "
             "discrepancy %.3g (want exactly 0)",
             pairs, worst));
}

void LooOracleEquivalence() {
  std::mt19937_64 gen(5150);
  double worst = 0.0;
  long entries = 0;
  for (int g = 0; g < 50; ++g) {
    const std::size_t m = std::uniform_int_distribution<std::size_t>(6, 80)(gen);
    const std::size_t n = std::uniform_int_distribution<std::size_t>(1, 20)(gen);
    MiaGrid grid = RandomGrid(gen, m, n);
    // Large offsets stress the downdate.
    std::vector<double> s(grid.scores().begin(), grid.scores().end());
    for (double& v : s) v += 1e4;
    grid = MiaGrid(m, n, s, std::vector<std::uint8_t>(grid.mask().begin(),
                                                      grid.mask().end()));
    const ShadowPool pool(grid);
    for (std::size_t r = 0; r < m; ++r) {
      for (std::size_t x = 0; x < n; ++x) {
        std::vector<double> in, out;
        for (std::size_t q = 0; q < m; ++q) {
          if (q != r) (grid.member(q, x) ? in : out).push_back(grid.score(q, x));
        }
        const ColumnStats got = pool.ColumnExcludingRow(r, x);
        if (in.size() < 2 || out.size() < 2) {
          if (!got.degenerate) worst = INFINITY;
          continue;
        }
        auto check = [&](const std::vector<double>& v, double mu, double sd) {
          double mean = 0;
          for (double a : v) mean += a;
          mean /= v.size();
          double ss = 0;
          for (double a : v) ss += (a - mean) * (a - mean);
          const double want_sd = std::sqrt(ss / (v.size() - 1));
          worst = std::max(worst, std::fabs(mu - mean) / std::fabs(mean));
          worst = std::max(worst, std::fabs(sd - want_sd) / want_sd);
        };
        check(in, got.mu_in, got.sigma_in);
        check(out, got.mu_out, got.sigma_out);
        ++entries;
      }
    }
  }
  Report(worst <= 1e-9, "loo-oracle-equivalence",
         Fmt("50 grids, %.0f (row, column) fits vs two-pass recomputation, max "
             "relative error %.3g (want <= 1e-9)",
             entries, worst));
}

void Numerics() {
  double worst_inv = 0.0;
  for (int i = -6000; i <= 6000; ++i) {
    const double z = i / 1000.0;
    // Phi^{-1}(1 - q) = -Phi^{-1}(q) exactly; the lower tail keeps the
    // digits that a p close to 1 cannot hold.
    const double back = z <= 0.0 ? NormalQuantile(NormalCdf(z))
                                 : -NormalQuantile(NormalSf(z));
    worst_inv = std::max(worst_inv, std::fabs(back - z));
  }
  double worst_cauchy = 0.0;
  for (int i = 1; i < 1000; ++i) {
    const double p = i / 1000.0;
    const double want = std::tan(std::numbers::pi * (p - 0.5));
    worst_cauchy = std::max(worst_cauchy,
                            std::fabs(StudentTQuantile(p, 1.0) - want) /
                                std::max(1.0, std::fabs(want)));
  }
  Report(worst_inv <= 1e-9 && worst_cauchy <= 1e-8, "numerics",
         Fmt("max |Phi^-1(Phi(z)) - z| on [-6,6] = %.3g (want <= 1e-9); max "
             "t quantile error vs tan(pi(p-1/2)) at df=1 = %.3g (want <= 1e-8)",
             worst_inv, worst_cauchy));
}

}  // namespace
}  // namespace mia

int main() {
  using namespace mia;
  FinitePopulationBiasAndSweep();
  PooledFprIdentity();
  {
    const MiaGrid grid = HeterogeneousGrid();
    CalibrationAndOrdering(grid);
  }
  GaussianClosedForm();
  TradeoffInvariance();
  LooOracleEquivalence();
  Numerics();
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
