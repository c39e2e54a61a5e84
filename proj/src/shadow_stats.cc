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

#include "mia_audit/shadow_stats.h"

#include <cmath>
#include <utility>

#include "mia_audit/error.h"

namespace mia {
namespace {

nlohmann::json Number(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

}  // namespace

std::size_t PerSampleStats::degenerate_count() const {
  std::size_t n = 0;
  for (const auto& c : columns) n += c.degenerate ? 1 : 0;
  return n;
}

EstimationMode ParseEstimationMode(const std::string& name) {
  if (name == "loo" || name == "leave-one-out") {
    return EstimationMode::kLeaveOneOut;
  }
  if (name == "oracle") return EstimationMode::kOracle;
  if (name == "pooled") return EstimationMode::kPooled;
  throw InvalidArgument("unknown estimation mode '" + name +
                        "' (expected loo, oracle or pooled)");
}

std::string EstimationModeName(EstimationMode mode) {
  switch (mode) {
    case EstimationMode::kLeaveOneOut:
      return "loo";
    case EstimationMode::kOracle:
      return "oracle";
    case EstimationMode::kPooled:
      return "pooled";
  }
  return "unknown";
}

VarianceModel ParseVarianceModel(const std::string& name) {
  if (name == "per-distribution") return VarianceModel::kPerDistribution;
  if (name == "global") return VarianceModel::kGlobal;
  throw InvalidArgument("unknown variance model '" + name +
                        "' (expected per-distribution or global)");
}

std::string VarianceModelName(VarianceModel model) {
  return model == VarianceModel::kGlobal ? "global" : "per-distribution";
}

double FinitePopulationCorrection(std::int64_t n_train, std::int64_t n_full) {
  if (n_train <= 0 || n_full <= 0 || n_train >= n_full) {
    throw InvalidArgument("finite population correction needs 0 < n_train < "
                          "n_full (got n_train=" + std::to_string(n_train) +
                          ", n_full=" + std::to_string(n_full) + ")");
  }
  return 1.0 - static_cast<double>(n_train) / static_cast<double>(n_full);
}

ShadowPool::ShadowPool(const MiaGrid& grid, EstimationOptions options)
    : grid_(&grid),
      options_(options),
      in_(grid.samples()),
      out_(grid.samples()),
      shift_(grid.row_scores(0).begin(), grid.row_scores(0).end()) {
  if (options_.fpc) {
    FinitePopulationCorrection(options_.fpc->n_train, options_.fpc->n_full);
  }
  for (std::size_t m = 0; m < grid.models(); ++m) {
    const auto scores = grid.row_scores(m);
    const auto mask = grid.row_mask(m);
    for (std::size_t x = 0; x < scores.size(); ++x) {
      (mask[x] ? in_[x] : out_[x]).Add(scores[x] - shift_[x]);
    }
  }
}

ColumnStats ShadowPool::Finalize(std::size_t x, const MomentAccumulator& in,
                                 const MomentAccumulator& out) const {
  ColumnStats c;
  c.n_in = in.count();
  c.n_out = out.count();
  if (c.n_in > 0) c.mu_in = shift_[x] + in.mean();
  if (c.n_out > 0) c.mu_out = shift_[x] + out.mean();
  if (options_.variance == VarianceModel::kGlobal) {
    const std::int64_t dof = c.n_in + c.n_out - 2;
    if (c.n_in >= 2 && c.n_out >= 2 && dof > 0) {
      const double sigma =
          std::sqrt((in.m2() + out.m2()) / static_cast<double>(dof));
      c.sigma_in = sigma;
      c.sigma_out = sigma;
    }
  } else {
    c.sigma_in = in.StdDev();
    c.sigma_out = out.StdDev();
  }
  c.degenerate = !(c.n_in >= 2 && c.n_out >= 2 && c.sigma_in > 0.0 &&
                   c.sigma_out > 0.0 && std::isfinite(c.sigma_in) &&
                   std::isfinite(c.sigma_out) && std::isfinite(c.delta()));
  if (options_.fpc) {
    const double fpc =
        FinitePopulationCorrection(options_.fpc->n_train, options_.fpc->n_full);
    c = ApplyFpc(c, 1.0 / std::sqrt(fpc));
  }
  return c;
}

PerSampleStats ShadowPool::Wrap(std::vector<ColumnStats> columns) const {
  PerSampleStats stats;
  stats.columns = std::move(columns);
  stats.sample_ids.reserve(grid_->samples());
  for (std::size_t x = 0; x < grid_->samples(); ++x) {
    stats.sample_ids.push_back(grid_->sample_id(x));
  }
  if (options_.fpc) {
    stats.fpc_applied = true;
    stats.sampling_ratio = static_cast<double>(options_.fpc->n_train) /
                           static_cast<double>(options_.fpc->n_full);
  }
  return stats;
}

ColumnStats ShadowPool::Column(std::size_t x) const {
  return Finalize(x, in_[x], out_[x]);
}

MomentAccumulator ShadowPool::Without(std::size_t m, std::size_t x,
                                      const MomentAccumulator& acc) const {
  if (acc.count() < 2) return MomentAccumulator();
  MomentAccumulator down = LooDowndate(acc, grid_->score(m, x) - shift_[x]);
  // Removing a far-out value can cancel most of m2; rescan the column then.
  if (down.m2() < kRescanRatio * acc.m2()) {
    const bool side = grid_->member(m, x);
    down = MomentAccumulator();
    for (std::size_t r = 0; r < grid_->models(); ++r) {
      if (r != m && grid_->member(r, x) == side) {
        down.Add(grid_->score(r, x) - shift_[x]);
      }
    }
  }
  return down;
}

ColumnStats ShadowPool::ColumnExcludingRow(std::size_t m, std::size_t x) const {
  if (grid_->member(m, x)) return Finalize(x, Without(m, x, in_[x]), out_[x]);
  return Finalize(x, in_[x], Without(m, x, out_[x]));
}

PerSampleStats ShadowPool::Pooled() const {
  std::vector<ColumnStats> columns;
  columns.reserve(samples());
  for (std::size_t x = 0; x < samples(); ++x) columns.push_back(Column(x));
  return Wrap(std::move(columns));
}

PerSampleStats ShadowPool::ExcludingRow(std::size_t m) const {
  if (m >= grid_->models()) throw InvalidArgument("row index out of range");
  std::vector<ColumnStats> columns;
  columns.reserve(samples());
  for (std::size_t x = 0; x < samples(); ++x) {
    columns.push_back(ColumnExcludingRow(m, x));
  }
  return Wrap(std::move(columns));
}

PerSampleStats EstimateStats(const MiaGrid& grid,
                             const EstimationOptions& options) {
  return ShadowPool(grid, options).Pooled();
}

PerSampleStats EstimateStatsExcludingRow(const MiaGrid& grid, std::size_t row,
                                         const EstimationOptions& options) {
  return ShadowPool(grid, options).ExcludingRow(row);
}

ColumnStats ApplyFpc(ColumnStats column, double inflation) {
  column.sigma_in *= inflation;
  column.sigma_out *= inflation;
  return column;
}

PerSampleStats ApplyFpc(PerSampleStats stats, std::int64_t n_train,
                        std::int64_t n_full) {
  if (stats.fpc_applied) {
    throw InvalidArgument("finite population correction already applied");
  }
  const double fpc = FinitePopulationCorrection(n_train, n_full);
  const double inflation = 1.0 / std::sqrt(fpc);
  for (auto& c : stats.columns) c = ApplyFpc(c, inflation);
  stats.fpc_applied = true;
  stats.sampling_ratio =
      static_cast<double>(n_train) / static_cast<double>(n_full);
  return stats;
}

double LiraScore(double s, double mu_in, double sigma_in, double mu_out,
                 double sigma_out) {
  if (!(sigma_in > 0.0) || !(sigma_out > 0.0)) {
    throw InvalidArgument("LiraScore: standard deviations must be positive");
  }
  const double z_in = (s - mu_in) / sigma_in;
  const double z_out = (s - mu_out) / sigma_out;
  return std::log(sigma_out / sigma_in) - 0.5 * (z_in * z_in - z_out * z_out);
}

double LiraScore(double s, const ColumnStats& column) {
  return LiraScore(s, column.mu_in, column.sigma_in, column.mu_out,
                   column.sigma_out);
}

nlohmann::json StatsToJson(const PerSampleStats& stats) {
  nlohmann::json records = nlohmann::json::array();
  for (std::size_t x = 0; x < stats.columns.size(); ++x) {
    const ColumnStats& c = stats.columns[x];
    nlohmann::json r = nlohmann::json::object();
    r["sample_id"] =
        x < stats.sample_ids.size() ? stats.sample_ids[x] : std::to_string(x);
    r["mu_in"] = Number(c.mu_in);
    r["mu_out"] = Number(c.mu_out);
    r["sigma_in"] = Number(c.sigma_in);
    r["sigma_out"] = Number(c.sigma_out);
    r["n_in"] = c.n_in;
    r["n_out"] = c.n_out;
    r["degenerate"] = c.degenerate;
    r["fpc_applied"] = stats.fpc_applied;
    r["sampling_ratio"] =
        stats.fpc_applied ? nlohmann::json(stats.sampling_ratio) : nullptr;
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace mia
