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

#ifndef MIA_AUDIT_SHADOW_STATS_H_
#define MIA_AUDIT_SHADOW_STATS_H_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mia_audit/grid.h"
#include "mia_audit/numerics.h"

namespace mia {

// Gaussian in/out fit for one sample (grid column).
struct ColumnStats {
  static constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

  double mu_in = kNaN;
  double mu_out = kNaN;
  double sigma_in = kNaN;
  double sigma_out = kNaN;
  std::int64_t n_in = 0;
  std::int64_t n_out = 0;
  // Fewer than two in or out observations, or a zero spread on either side.
  // Degenerate columns are excluded downstream, never imputed.
  bool degenerate = true;

  double delta() const { return mu_in - mu_out; }
};

struct PerSampleStats {
  std::vector<ColumnStats> columns;
  std::vector<std::string> sample_ids;
  bool fpc_applied = false;
  // n_train / n_full when fpc_applied.
  double sampling_ratio = 0.0;

  std::size_t size() const { return columns.size(); }
  std::size_t degenerate_count() const;
};

// Which rows feed the per-sample fit for a target row:
//   kLeaveOneOut  every other row of the (sub)grid under evaluation
//   kOracle       every other row of the full grid, targets are a subset
//   kPooled       all rows, no exclusion
enum class EstimationMode { kLeaveOneOut, kOracle, kPooled };

EstimationMode ParseEstimationMode(const std::string& name);
std::string EstimationModeName(EstimationMode mode);

enum class VarianceModel {
  kPerDistribution,  // separate sigma_in and sigma_out
  kGlobal,           // one pooled within-group sigma for both sides
};

VarianceModel ParseVarianceModel(const std::string& name);
std::string VarianceModelName(VarianceModel model);

struct FpcSpec {
  std::int64_t n_train = 0;
  std::int64_t n_full = 0;
};

struct EstimationOptions {
  VarianceModel variance = VarianceModel::kPerDistribution;
  std::optional<FpcSpec> fpc;
};

// Per-column in/out moment accumulators over every row of a grid. Built in
// one O(MN) pass; the fit with any single row excluded is then an O(1)
// downdate per column. Keeps a pointer to `grid`, which must outlive the pool.
class ShadowPool {
 public:
  ShadowPool(const MiaGrid& grid, EstimationOptions options = {});

  std::size_t samples() const { return in_.size(); }

  ColumnStats Column(std::size_t x) const;
  ColumnStats ColumnExcludingRow(std::size_t m, std::size_t x) const;

  PerSampleStats Pooled() const;
  PerSampleStats ExcludingRow(std::size_t m) const;

 private:
  ColumnStats Finalize(std::size_t x, const MomentAccumulator& in,
                       const MomentAccumulator& out) const;
  PerSampleStats Wrap(std::vector<ColumnStats> columns) const;
  // `acc` with row m's score of column x removed.
  MomentAccumulator Without(std::size_t m, std::size_t x,
                            const MomentAccumulator& acc) const;

  static constexpr double kRescanRatio = 1e-3;

  const MiaGrid* grid_;
  EstimationOptions options_;
  std::vector<MomentAccumulator> in_;
  std::vector<MomentAccumulator> out_;
  // Accumulators hold score - shift_[x] (row 0's score), which keeps the
  // moments accurate when a column's spread is tiny next to its mean.
  std::vector<double> shift_;
};

// Pooled fit over all rows.
PerSampleStats EstimateStats(const MiaGrid& grid,
                             const EstimationOptions& options = {});

// Fit over all rows except `row`.
PerSampleStats EstimateStatsExcludingRow(const MiaGrid& grid, std::size_t row,
                                         const EstimationOptions& options = {});

// Multiplies sigma_in and sigma_out by 1 / sqrt(1 - n_train / n_full).
// Sampling training sets without replacement from a finite superset shrinks
// the empirical spread by sqrt(FPC); this undoes it.
PerSampleStats ApplyFpc(PerSampleStats stats, std::int64_t n_train,
                        std::int64_t n_full);
ColumnStats ApplyFpc(ColumnStats column, double inflation);

// 1 - n_train / n_full, validated.
double FinitePopulationCorrection(std::int64_t n_train, std::int64_t n_full);

// log N(s; mu_in, sigma_in^2) - log N(s; mu_out, sigma_out^2) in log space.
double LiraScore(double s, double mu_in, double sigma_in, double mu_out,
                 double sigma_out);
double LiraScore(double s, const ColumnStats& column);

// Array of per-column records, NaN written as null.
nlohmann::json StatsToJson(const PerSampleStats& stats);

}  // namespace mia

#endif  // MIA_AUDIT_SHADOW_STATS_H_
