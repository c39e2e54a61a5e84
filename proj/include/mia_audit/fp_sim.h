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

#ifndef MIA_AUDIT_FP_SIM_H_
#define MIA_AUDIT_FP_SIM_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "mia_audit/grid.h"
#include "mia_audit/shadow_stats.h"

namespace mia {

// Mean-model simulator. A population D_full of n_full points
// x ~ N(0, sigma^2 I_dim) is drawn once; model m is the mean of an
// n_train-subset of D_full and scores sample i by <x_i, model>.
//
// Draw order (part of the grid contract, recorded in the metadata):
//   stream 0     population, point by point, coordinate by coordinate
//   stream m+1   row m: partial Fisher-Yates over 0..n_full-1 taking the
//                first n_train slots, or n_train Below(n_full) draws when
//                with_replacement is set
// Streams come from Rng::ForStream(seed, k), so rows can be generated in
// any order or in parallel.
struct SimConfig {
  std::int64_t n_full = 1000;
  std::int64_t n_train = 500;
  std::int64_t dim = 500;
  double sigma = 1.0;
  std::int64_t n_models = 2048;
  std::uint64_t seed = 0;
  // Sample training sets with replacement (iid baseline); a point is a
  // member when drawn at least once.
  bool with_replacement = false;

  // Throws InvalidArgument naming the offending field.
  void Validate() const;

  nlohmann::json ToJson() const;
  // Missing keys keep their defaults; unknown keys are rejected.
  static SimConfig FromJson(const nlohmann::json& j);
};

struct SimSample {
  double norm_x = 0.0;
  double sigma_emp_in = 0.0;
  double sigma_emp_out = 0.0;
  double sigma_ana_in = 0.0;
  double sigma_ana_out = 0.0;
  double ratio_in = 0.0;
  double ratio_out = 0.0;
};

struct SimResult {
  SimConfig config;
  // 1 - n_train / n_full; NaN for with_replacement runs.
  double fpc = 0.0;
  // Whether sigma_emp_* already carry the 1 / sqrt(fpc) inflation.
  bool fpc_corrected = false;
  std::vector<SimSample> samples;
};

struct SimOutput {
  MiaGrid grid;
  SimResult result;
};

SimOutput Simulate(const SimConfig& config);

enum class Membership { kIn, kOut };

// Spread of <x, mean of n_train iid N(0, sigma^2 I) points> given x:
//   out  sigma |x| / sqrt(N)
//   in   sigma |x| sqrt(N - 1) / N   (x itself is one of the N points)
double AnalyticSigma(double norm_x, std::int64_t n_train, double sigma,
                     Membership membership);

// Fills one SimSample per column from `stats` (sigma_emp) and the norms
// (sigma_ana). Pass ApplyFpc(stats, ...) for corrected ratios.
SimResult BuildSimResult(const SimConfig& config,
                         const std::vector<double>& norms,
                         const PerSampleStats& stats);

// Norms read back from a simulated grid's metadata.
std::vector<double> SimNorms(const MiaGrid& grid);

struct RatioSummary {
  static constexpr std::size_t kBins = 50;
  static constexpr double kHistMax = 1.5;

  double mean_ratio_in = 0.0;
  double mean_ratio_out = 0.0;
  std::size_t count_in = 0;   // finite ratios averaged
  std::size_t count_out = 0;
  // Bin b covers [b, b + 1) * kHistMax / kBins; the last bin is closed.
  std::vector<std::size_t> hist_in;
  std::vector<std::size_t> hist_out;
  std::size_t overflow_in = 0;  // ratios above kHistMax
  std::size_t overflow_out = 0;
};

// Throws InvalidArgument when the result has no finite ratios.
RatioSummary SummarizeRatios(const SimResult& result);

// Columns: sample_id, norm_x, sigma_emp_in, sigma_emp_out, sigma_ana_in,
// sigma_ana_out, ratio_in, ratio_out.
std::string SimResultCsv(const SimResult& result);
nlohmann::json SimSummaryJson(const SimResult& result,
                              const RatioSummary& summary);

}  // namespace mia

#endif  // MIA_AUDIT_FP_SIM_H_
