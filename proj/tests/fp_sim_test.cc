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

#include "mia_audit/fp_sim.h"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "mia_audit/error.h"
#include "mia_audit/random.h"

namespace mia {
namespace {

SimConfig Small() {
  SimConfig c;
  c.n_full = 60;
  c.n_train = 30;
  c.dim = 20;
  c.n_models = 64;
  c.seed = 3;
  return c;
}

TEST(SimConfigTest, Validation) {
  SimConfig c = Small();
  EXPECT_NO_THROW(c.Validate());
  c.n_models = 1;
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c = Small();
  c.n_train = c.n_full;
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c.with_replacement = true;
  EXPECT_NO_THROW(c.Validate());
  c = Small();
  c.dim = 0;
  EXPECT_THROW(c.Validate(), InvalidArgument);
  c = Small();
  c.sigma = -1;
  EXPECT_THROW(c.Validate(), InvalidArgument);
}

TEST(SimConfigTest, JsonRoundTrip) {
  SimConfig c = Small();
  c.with_replacement = true;
  const SimConfig back = SimConfig::FromJson(c.ToJson());
  EXPECT_EQ(back.ToJson(), c.ToJson());
  EXPECT_THROW(SimConfig::FromJson({{"n_ful", 3}}), InvalidArgument);
  EXPECT_THROW(SimConfig::FromJson({{"dim", "big"}}), InvalidArgument);
}

TEST(SimulateTest, StructureOfGrid) {
  const SimOutput out = Simulate(Small());
  const MiaGrid& g = out.grid;
  EXPECT_EQ(g.models(), 64u);
  EXPECT_EQ(g.samples(), 60u);
  for (std::size_t m = 0; m < g.models(); ++m) {
    const auto mask = g.row_mask(m);
    EXPECT_EQ(std::accumulate(mask.begin(), mask.end(), 0), 30);
  }
  EXPECT_EQ(g.meta()["generator"], "fp_sim");
  EXPECT_EQ(g.meta()["N_train"], 30);
  EXPECT_EQ(g.meta()["rng"], Rng::kAlgorithm);
  EXPECT_EQ(out.result.samples.size(), 60u);
  EXPECT_DOUBLE_EQ(out.result.fpc, 0.5);
}

TEST(SimulateTest, ScoresAreInnerProductsWithSubsetMean) {
  const SimConfig c = Small();
  const SimOutput out = Simulate(c);
  // Rebuild the population from its documented stream.
  Rng rng = Rng::ForStream(c.seed, 0);
  std::vector<double> pts(c.n_full * c.dim);
  for (double& v : pts) v = c.sigma * rng.Normal();
  for (std::size_t m : {0u, 17u, 63u}) {
    std::vector<double> mean(c.dim, 0.0);
    for (std::int64_t i = 0; i < c.n_full; ++i) {
      if (!out.grid.member(m, i)) continue;
      for (std::int64_t k = 0; k < c.dim; ++k) mean[k] += pts[i * c.dim + k];
    }
    for (double& v : mean) v /= c.n_train;
    for (std::int64_t i = 0; i < c.n_full; ++i) {
      double s = 0;
      for (std::int64_t k = 0; k < c.dim; ++k) s += pts[i * c.dim + k] * mean[k];
      EXPECT_NEAR(out.grid.score(m, i), s, 1e-12 * (1 + std::fabs(s)));
    }
  }
}

TEST(SimulateTest, DeterministicAndSeedSensitive) {
  const SimOutput a = Simulate(Small());
  const SimOutput b = Simulate(Small());
  EXPECT_TRUE(a.grid == b.grid);
  SimConfig other = Small();
  other.seed = 4;
  EXPECT_FALSE(Simulate(other).grid == a.grid);
}

TEST(SimulateTest, OneLeftOutPerRow) {
  SimConfig c = Small();
  c.n_train = c.n_full - 1;
  const SimOutput out = Simulate(c);
  for (std::size_t m = 0; m < out.grid.models(); ++m) {
    const auto mask = out.grid.row_mask(m);
    EXPECT_EQ(std::count(mask.begin(), mask.end(), 0), 1);
  }
}

TEST(SimulateTest, ZeroPopulationGivesZeroScores) {
  SimConfig c = Small();
  c.dim = 1;
  c.sigma = 0.0;
  const SimOutput out = Simulate(c);
  for (double s : out.grid.scores()) EXPECT_EQ(s, 0.0);
  EXPECT_THROW(SummarizeRatios(out.result), InvalidArgument);
}

TEST(AnalyticSigmaTest, ClosedForms) {
  EXPECT_EQ(AnalyticSigma(0.0, 10, 1.0, Membership::kIn), 0.0);
  EXPECT_EQ(AnalyticSigma(0.0, 10, 1.0, Membership::kOut), 0.0);
  EXPECT_DOUBLE_EQ(AnalyticSigma(3.0, 1, 2.0, Membership::kOut), 6.0);
  EXPECT_DOUBLE_EQ(AnalyticSigma(3.0, 4, 2.0, Membership::kOut), 3.0);
  EXPECT_DOUBLE_EQ(AnalyticSigma(3.0, 4, 2.0, Membership::kIn),
                   2.0 * 3.0 * std::sqrt(3.0) / 4.0);
  EXPECT_THROW(AnalyticSigma(1.0, 1, 1.0, Membership::kIn), InvalidArgument);
  EXPECT_THROW(AnalyticSigma(-1.0, 3, 1.0, Membership::kOut), InvalidArgument);
}

// Fresh iid training sets for one fixed x, as in the closed-form derivation.
// tests/oracles/analytic_sigma_mc.py runs the same check at N = d = 500.
TEST(AnalyticSigmaTest, MatchesIidMonteCarlo) {
  const std::int64_t n = 40, d = 40, reps = 100000;
  Rng rng(8);
  std::vector<double> x(d);
  double norm2 = 0;
  for (double& v : x) v = rng.Normal(), norm2 += v * v;
  MomentAccumulator in_acc, out_acc;
  std::vector<double> p(d);
  for (std::int64_t r = 0; r < reps; ++r) {
    double proj_sum = 0, last = 0;
    for (std::int64_t j = 0; j < n; ++j) {
      double proj = 0;
      for (double& v : p) v = rng.Normal();
      for (std::int64_t k = 0; k < d; ++k) proj += p[k] * x[k];
      proj_sum += proj;
      last = proj;
    }
    out_acc.Add(proj_sum / n);
    in_acc.Add((norm2 + proj_sum - last) / n);
  }
  const double norm = std::sqrt(norm2);
  EXPECT_NEAR(out_acc.StdDev() / AnalyticSigma(norm, n, 1.0, Membership::kOut),
              1.0, 0.01);
  EXPECT_NEAR(in_acc.StdDev() / AnalyticSigma(norm, n, 1.0, Membership::kIn),
              1.0, 0.01);
  EXPECT_NEAR(in_acc.mean(), norm2 / n, 0.02 * norm2 / n + 0.05);
}

TEST(RatioSummaryTest, MeansAndHistogram) {
  SimResult r;
  r.samples = {{1, 0, 0, 0, 0, 0.5, 0.7},
               {1, 0, 0, 0, 0, 0.7, 2.0},
               {1, 0, 0, 0, 0, NAN, 1.5}};
  const RatioSummary s = SummarizeRatios(r);
  EXPECT_DOUBLE_EQ(s.mean_ratio_in, 0.6);
  EXPECT_DOUBLE_EQ(s.mean_ratio_out, (0.7 + 2.0 + 1.5) / 3);
  EXPECT_EQ(s.count_in, 2u);
  EXPECT_EQ(s.hist_in.size(), 50u);
  EXPECT_EQ(s.hist_in[16], 1u);  // 0.5 in [0.48, 0.51)
  EXPECT_EQ(s.hist_out[49], 1u);  // 1.5 closes the last bin
  EXPECT_EQ(s.overflow_out, 1u);
  EXPECT_THROW(SummarizeRatios(SimResult{}), InvalidArgument);
}

TEST(SimResultTest, FpcCorrectedResultAndCsv) {
  const SimConfig c = Small();
  const SimOutput out = Simulate(c);
  const SimResult fixed =
      BuildSimResult(c, SimNorms(out.grid),
                     ApplyFpc(EstimateStats(out.grid), c.n_train, c.n_full));
  EXPECT_TRUE(fixed.fpc_corrected);
  EXPECT_NEAR(fixed.samples[5].ratio_out,
              out.result.samples[5].ratio_out / std::sqrt(0.5), 1e-12);
  const std::string csv = SimResultCsv(out.result);
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "sample_id,norm_x,sigma_emp_in,sigma_emp_out,sigma_ana_in,"
            "sigma_ana_out,ratio_in,ratio_out");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 61);
  const auto j = SimSummaryJson(out.result, SummarizeRatios(out.result));
  EXPECT_EQ(j["hist_edges"].size(), 51u);
  EXPECT_DOUBLE_EQ(j["fpc"].get<double>(), 0.5);
}

TEST(SimulateTest, WithReplacementBaselineHasNoShrinkage) {
  SimConfig c;
  c.n_full = 200;
  c.n_train = 100;
  c.dim = 100;
  c.n_models = 2048;
  c.seed = 12;
  c.with_replacement = true;
  const SimOutput out = Simulate(c);
  EXPECT_TRUE(std::isnan(out.result.fpc));
  EXPECT_NEAR(SummarizeRatios(out.result).mean_ratio_out, 1.0, 0.05);
}

}  // namespace
}  // namespace mia
