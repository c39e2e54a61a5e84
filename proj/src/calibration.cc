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

#include "mia_audit/calibration.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <utility>

#include "mia_audit/error.h"
#include "mia_audit/format.h"
#include "mia_audit/parallel.h"

namespace mia {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void CheckAlpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw InvalidArgument("alpha must lie in (0, 1), got " + FormatDouble(alpha));
  }
}

// ceil(v), with values within rounding of an integer snapped to it.
std::size_t SnappedCeil(double v) {
  const double nearest = std::round(v);
  if (std::fabs(v - nearest) <= 1e-9 * std::max(1.0, v)) {
    return static_cast<std::size_t>(nearest);
  }
  return static_cast<std::size_t>(std::ceil(v));
}

std::size_t MinOutScores(double alpha) { return SnappedCeil(2.0 / alpha); }
double WarnOutScores(double alpha) { return 10.0 / alpha; }

std::size_t CountAbove(std::span<const double> sorted, double tau) {
  return static_cast<std::size_t>(
      sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), tau));
}

double Fraction(std::size_t count, std::size_t total) {
  return total == 0 ? kNaN
                    : static_cast<double>(count) / static_cast<double>(total);
}

bool IsEmpirical(Strategy s) {
  return s == Strategy::kConcatNaive || s == Strategy::kConcatPP ||
         s == Strategy::kAvgPerSample;
}

int SignOf(double delta) { return delta < 0.0 ? -1 : 1; }

double StandardizeScore(double s, const ColumnStats& c) {
  return SignOf(c.delta()) * (s - c.mu_out) / c.sigma_out;
}

}  // namespace

struct CalibratedGridBuilder {
  // `stats_for(m, x)` is the fit used for entry (m, x) of the pool grid.
  template <typename StatsFor>
  static CalibratedGrid Build(const MiaGrid& pool,
                              std::span<const std::size_t> targets,
                              EstimationMode mode, PerSampleStats pool_stats,
                              const StatsFor& stats_for) {
    const std::size_t n = pool.samples();
    const std::size_t rows = targets.size();
    std::vector<double> values(rows * n, 0.0);
    std::vector<std::uint8_t> bad(rows * n, 0);
    ParallelFor(rows, [&](std::size_t t) {
      const std::size_t m = targets[t];
      for (std::size_t x = 0; x < n; ++x) {
        const ColumnStats c = stats_for(m, x);
        if (c.degenerate) {
          bad[t * n + x] = 1;
        } else {
          values[t * n + x] = StandardizeScore(pool.score(m, x), c);
        }
      }
    });

    std::vector<std::uint8_t> keep(n, 1);
    for (std::size_t x = 0; x < n; ++x) {
      if (pool_stats.columns[x].degenerate) keep[x] = 0;
    }
    for (std::size_t i = 0; i < bad.size(); ++i) {
      if (bad[i]) keep[i % n] = 0;
    }

    CalibratedGrid g;
    g.mode_ = mode;
    g.rows_ = rows;
    for (std::size_t x = 0; x < n; ++x) {
      if (keep[x]) {
        const ColumnStats& c = pool_stats.columns[x];
        g.column_index_.push_back(x);
        g.column_ids_.push_back(pool.sample_id(x));
        g.sign_delta_.push_back(SignOf(c.delta()));
        g.variance_ratio_.push_back(c.sigma_in / c.sigma_out);
      } else {
        g.degenerate_ids_.push_back(pool.sample_id(x));
      }
    }
    const std::size_t cols = g.column_index_.size();
    g.raw_.reserve(rows * cols);
    g.standardized_.reserve(rows * cols);
    g.mask_.reserve(rows * cols);
    for (std::size_t t = 0; t < rows; ++t) {
      for (std::size_t x : g.column_index_) {
        g.raw_.push_back(pool.score(targets[t], x));
        g.standardized_.push_back(values[t * n + x]);
        g.mask_.push_back(pool.member(targets[t], x) ? 1 : 0);
      }
    }
    g.pool_stats_ = std::move(pool_stats);
    return g;
  }
};

Strategy ParseStrategy(const std::string& name) {
  for (Strategy s : kAllStrategies) {
    if (StrategyName(s) == name) return s;
  }
  throw InvalidArgument("unknown strategy '" + name +
                        "' (expected naive, pp, per-sample, pp-normal, pp-t "
                        "or per-sample-normal)");
}

std::string StrategyName(Strategy strategy) {
  switch (strategy) {
    case Strategy::kConcatNaive:
      return "naive";
    case Strategy::kConcatPP:
      return "pp";
    case Strategy::kAvgPerSample:
      return "per-sample";
    case Strategy::kConcatPPNormal:
      return "pp-normal";
    case Strategy::kConcatPPStudentT:
      return "pp-t";
    case Strategy::kAvgPerSampleNormal:
      return "per-sample-normal";
  }
  return "unknown";
}

std::string ScoreSpaceName(ScoreSpace space) {
  return space == ScoreSpace::kRaw ? "raw" : "standardized";
}

ScoreSpace StrategyScoreSpace(Strategy strategy) {
  return strategy == Strategy::kConcatNaive ? ScoreSpace::kRaw
                                            : ScoreSpace::kStandardized;
}

std::string EvalStatusName(EvalStatus status) {
  switch (status) {
    case EvalStatus::kOk:
      return "ok";
    case EvalStatus::kLowCount:
      return "low-count";
    case EvalStatus::kEmptyRejection:
      return "empty-rejection";
    case EvalStatus::kUndefined:
      return "undefined";
  }
  return "unknown";
}

CalibratedGrid Standardize(const MiaGrid& grid, const PerSampleStats& stats) {
  if (stats.size() != grid.samples()) {
    throw InvalidArgument("missing stats for a column: have " +
                          std::to_string(stats.size()) + ", grid has " +
                          std::to_string(grid.samples()));
  }
  std::vector<std::size_t> targets(grid.models());
  for (std::size_t m = 0; m < targets.size(); ++m) targets[m] = m;
  return CalibratedGridBuilder::Build(
      grid, targets, EstimationMode::kPooled, stats,
      [&](std::size_t, std::size_t x) -> const ColumnStats& {
        return stats.columns[x];
      });
}

CalibratedGrid Calibrate(const MiaGrid& grid,
                         const CalibrationOptions& options) {
  const std::size_t m_prime =
      options.target_models == 0 ? grid.models() : options.target_models;
  if (options.mode == EstimationMode::kOracle) {
    const auto targets = SelectModels(grid.models(), m_prime, options.selection);
    const ShadowPool pool(grid, options.estimation);
    return CalibratedGridBuilder::Build(
        grid, targets, EstimationMode::kOracle, pool.Pooled(),
        [&](std::size_t m, std::size_t x) {
          return pool.ColumnExcludingRow(m, x);
        });
  }
  const MiaGrid sub = m_prime == grid.models()
                          ? grid
                          : SubsetModels(grid, m_prime, options.selection);
  const ShadowPool pool(sub, options.estimation);
  std::vector<std::size_t> targets(sub.models());
  for (std::size_t m = 0; m < targets.size(); ++m) targets[m] = m;
  if (options.mode == EstimationMode::kPooled) {
    const PerSampleStats stats = pool.Pooled();
    return CalibratedGridBuilder::Build(
        sub, targets, EstimationMode::kPooled, stats,
        [&](std::size_t, std::size_t x) -> const ColumnStats& {
          return stats.columns[x];
        });
  }
  return CalibratedGridBuilder::Build(
      sub, targets, EstimationMode::kLeaveOneOut, pool.Pooled(),
      [&](std::size_t m, std::size_t x) {
        return pool.ColumnExcludingRow(m, x);
      });
}

double EmpiricalThreshold(std::span<const double> sorted_out, double alpha) {
  CheckAlpha(alpha);
  return EmpiricalQuantile(sorted_out, 1.0 - alpha);
}

Evaluator::Evaluator(const CalibratedGrid& grid)
    : m_used_(grid.m_used()),
      degenerate_columns_(grid.degenerate_ids().size()),
      column_ids_(grid.column_ids()) {
  columns_.resize(grid.columns());
  for (std::size_t m = 0; m < grid.rows(); ++m) {
    for (std::size_t c = 0; c < grid.columns(); ++c) {
      Column& col = columns_[c];
      if (grid.member(m, c)) {
        col.in_raw.push_back(grid.raw(m, c));
        col.in_std.push_back(grid.standardized(m, c));
      } else {
        col.out_raw.push_back(grid.raw(m, c));
        col.out_std.push_back(grid.standardized(m, c));
      }
    }
  }
  for (Column& col : columns_) {
    std::sort(col.out_raw.begin(), col.out_raw.end());
    std::sort(col.in_raw.begin(), col.in_raw.end());
    std::sort(col.out_std.begin(), col.out_std.end());
    std::sort(col.in_std.begin(), col.in_std.end());
    n_in_ += col.in_raw.size();
    n_out_ += col.out_raw.size();
    pooled_out_raw_.insert(pooled_out_raw_.end(), col.out_raw.begin(),
                           col.out_raw.end());
    pooled_out_std_.insert(pooled_out_std_.end(), col.out_std.begin(),
                           col.out_std.end());
  }
  std::sort(pooled_out_raw_.begin(), pooled_out_raw_.end());
  std::sort(pooled_out_std_.begin(), pooled_out_std_.end());
}

const StudentTFit& Evaluator::student_t_fit() const {
  std::call_once(t_fit_once_, [this] { t_fit_ = FitStudentT(pooled_out_std_); });
  return *t_fit_;
}

double Evaluator::GlobalThreshold(Strategy strategy, double alpha) const {
  switch (strategy) {
    case Strategy::kConcatNaive:
      return EmpiricalThreshold(pooled_out_raw_, alpha);
    case Strategy::kConcatPP:
      return EmpiricalThreshold(pooled_out_std_, alpha);
    case Strategy::kConcatPPNormal:
    case Strategy::kAvgPerSampleNormal:
      return NormalQuantile(1.0 - alpha);
    case Strategy::kConcatPPStudentT: {
      const StudentTFit& fit = student_t_fit();
      return fit.scale * StudentTQuantile(1.0 - alpha, fit.df);
    }
    case Strategy::kAvgPerSample:
      break;
  }
  throw InvalidArgument("strategy has no global threshold");
}

EvalRow Evaluator::Evaluate(Strategy strategy, double alpha) const {
  CheckAlpha(alpha);
  EvalRow row;
  row.strategy = strategy;
  row.alpha = alpha;
  row.m_used = m_used_;
  row.n_in = n_in_;
  row.n_out = n_out_;
  row.degenerate_columns = degenerate_columns_;
  row.space = StrategyScoreSpace(strategy);
  const std::size_t min_out = MinOutScores(alpha);
  const double warn_out = WarnOutScores(alpha);

  auto undefined = [&row] {
    row.tpr = kNaN;
    row.realized_fpr = kNaN;
    row.threshold = kNaN;
    row.status = EvalStatus::kUndefined;
    return row;
  };

  if (columns_.empty()) return undefined();

  if (strategy == Strategy::kAvgPerSample) {
    std::size_t min_column_out = std::numeric_limits<std::size_t>::max();
    for (const Column& col : columns_) {
      if (col.out_std.size() < min_out || col.in_std.empty()) return undefined();
      min_column_out = std::min(min_column_out, col.out_std.size());
    }
    double tpr_sum = 0.0;
    double fpr_sum = 0.0;
    double tau_sum = 0.0;
    std::size_t out_above = 0;
    for (const Column& col : columns_) {
      const double tau = EmpiricalThreshold(col.out_std, alpha);
      const std::size_t above = CountAbove(col.out_std, tau);
      out_above += above;
      tpr_sum += Fraction(CountAbove(col.in_std, tau), col.in_std.size());
      fpr_sum += Fraction(above, col.out_std.size());
      tau_sum += tau;
    }
    const double k = static_cast<double>(columns_.size());
    row.tpr = tpr_sum / k;
    row.realized_fpr = fpr_sum / k;
    row.threshold = tau_sum / k;
    if (out_above == 0) {
      row.status = EvalStatus::kEmptyRejection;
    } else if (static_cast<double>(min_column_out) < warn_out) {
      row.status = EvalStatus::kLowCount;
    }
    return row;
  }

  if (IsEmpirical(strategy) && n_out_ < min_out) return undefined();
  const double tau = GlobalThreshold(strategy, alpha);
  row.threshold = tau;
  const bool raw = row.space == ScoreSpace::kRaw;

  std::size_t out_above = 0;
  if (strategy == Strategy::kAvgPerSampleNormal) {
    double tpr_sum = 0.0;
    double fpr_sum = 0.0;
    std::size_t tpr_cols = 0;
    std::size_t fpr_cols = 0;
    for (const Column& col : columns_) {
      if (!col.in_std.empty()) {
        tpr_sum += Fraction(CountAbove(col.in_std, tau), col.in_std.size());
        ++tpr_cols;
      }
      if (!col.out_std.empty()) {
        const std::size_t above = CountAbove(col.out_std, tau);
        out_above += above;
        fpr_sum += Fraction(above, col.out_std.size());
        ++fpr_cols;
      }
    }
    row.tpr = tpr_cols ? tpr_sum / static_cast<double>(tpr_cols) : kNaN;
    row.realized_fpr = fpr_cols ? fpr_sum / static_cast<double>(fpr_cols) : kNaN;
  } else {
    std::size_t in_above = 0;
    for (const Column& col : columns_) {
      in_above += CountAbove(raw ? col.in_raw : col.in_std, tau);
    }
    out_above = CountAbove(raw ? pooled_out_raw_ : pooled_out_std_, tau);
    row.tpr = Fraction(in_above, n_in_);
    row.realized_fpr = Fraction(out_above, n_out_);
  }
  if (out_above == 0) {
    row.status = EvalStatus::kEmptyRejection;
  } else if (IsEmpirical(strategy) &&
             static_cast<double>(n_out_) < warn_out) {
    row.status = EvalStatus::kLowCount;
  }
  return row;
}

std::vector<double> Evaluator::PerSampleFpr(Strategy strategy,
                                            double alpha) const {
  CheckAlpha(alpha);
  std::vector<double> fprs;
  fprs.reserve(columns_.size());
  if (strategy == Strategy::kAvgPerSample) {
    const std::size_t min_out = MinOutScores(alpha);
    for (const Column& col : columns_) {
      if (col.out_std.size() < min_out) {
        fprs.push_back(kNaN);
        continue;
      }
      const double tau = EmpiricalThreshold(col.out_std, alpha);
      fprs.push_back(Fraction(CountAbove(col.out_std, tau), col.out_std.size()));
    }
    return fprs;
  }
  if (IsEmpirical(strategy) && n_out_ < MinOutScores(alpha)) {
    throw InvalidArgument("too few out scores (" + std::to_string(n_out_) +
                          ") for a threshold at alpha=" + FormatDouble(alpha));
  }
  const double tau = GlobalThreshold(strategy, alpha);
  const bool raw = StrategyScoreSpace(strategy) == ScoreSpace::kRaw;
  for (const Column& col : columns_) {
    const auto& out = raw ? col.out_raw : col.out_std;
    fprs.push_back(Fraction(CountAbove(out, tau), out.size()));
  }
  return fprs;
}

EvalRow Evaluate(const CalibratedGrid& grid, Strategy strategy, double alpha) {
  return Evaluator(grid).Evaluate(strategy, alpha);
}

std::vector<SampleFpr> PerSampleFprDistribution(const CalibratedGrid& grid,
                                                Strategy strategy,
                                                double alpha) {
  const Evaluator evaluator(grid);
  const auto fprs = evaluator.PerSampleFpr(strategy, alpha);
  std::vector<SampleFpr> out;
  out.reserve(fprs.size());
  for (std::size_t c = 0; c < fprs.size(); ++c) {
    out.push_back({evaluator.column_ids()[c], fprs[c]});
  }
  return out;
}

DecompositionCheck ConcatDecompositionCheck(const MiaGrid& grid, double tau) {
  const std::size_t n = grid.samples();
  std::vector<std::size_t> out_total(n, 0), out_above(n, 0);
  std::vector<std::size_t> in_total(n, 0), in_above(n, 0);
  for (std::size_t m = 0; m < grid.models(); ++m) {
    for (std::size_t x = 0; x < n; ++x) {
      const bool above = grid.score(m, x) > tau;
      if (grid.member(m, x)) {
        ++in_total[x];
        in_above[x] += above;
      } else {
        ++out_total[x];
        out_above[x] += above;
      }
    }
  }
  std::size_t total_out = 0, total_out_above = 0;
  std::size_t total_in = 0, total_in_above = 0;
  for (std::size_t x = 0; x < n; ++x) {
    total_out += out_total[x];
    total_out_above += out_above[x];
    total_in += in_total[x];
    total_in_above += in_above[x];
  }
  if (total_out == 0) throw InvalidArgument("grid has no out scores");

  DecompositionCheck check;
  check.pooled_fpr = Fraction(total_out_above, total_out);
  check.pooled_tpr = Fraction(total_in_above, total_in);
  double fpr = 0.0;
  double tpr = 0.0;
  for (std::size_t x = 0; x < n; ++x) {
    if (out_total[x] > 0) {
      fpr += Fraction(out_total[x], total_out) *
             Fraction(out_above[x], out_total[x]);
    }
    if (in_total[x] > 0) {
      tpr += Fraction(in_total[x], total_in) * Fraction(in_above[x], in_total[x]);
    }
  }
  check.weighted_mean_fpr = fpr;
  check.weighted_mean_tpr = total_in > 0 ? tpr : kNaN;
  return check;
}

double AnalyticTprUnequalVariance(double delta_over_sigma_out,
                                  double variance_ratio, double alpha) {
  CheckAlpha(alpha);
  if (!(delta_over_sigma_out >= 0.0) || !std::isfinite(delta_over_sigma_out)) {
    throw InvalidArgument("delta / sigma_out must be finite and >= 0");
  }
  if (!(variance_ratio > 0.0) || !std::isfinite(variance_ratio)) {
    throw InvalidArgument("sigma_in / sigma_out must be finite and > 0");
  }
  const double t_alpha = NormalQuantile(1.0 - alpha);
  return NormalSf((t_alpha - delta_over_sigma_out) / variance_ratio);
}

std::string EvalReportCsv(std::span<const EvalRow> rows) {
  std::string out =
      "strategy,alpha,m_used,tpr,realized_fpr,threshold,n_in,n_out,"
      "degenerate_columns\n";
  for (const EvalRow& r : rows) {
    out += StrategyName(r.strategy) + "," + FormatDouble(r.alpha) + "," +
           std::to_string(r.m_used) + "," + FormatDouble(r.tpr) + "," +
           FormatDouble(r.realized_fpr) + "," + FormatDouble(r.threshold) +
           "," + std::to_string(r.n_in) + "," + std::to_string(r.n_out) + "," +
           std::to_string(r.degenerate_columns) + "\n";
  }
  return out;
}

nlohmann::json EvalReportJson(std::span<const EvalRow> rows) {
  nlohmann::json out = nlohmann::json::array();
  for (const EvalRow& r : rows) {
    nlohmann::json j = nlohmann::json::object();
    j["strategy"] = StrategyName(r.strategy);
    j["alpha"] = r.alpha;
    j["m_used"] = r.m_used;
    j["tpr"] = JsonNumber(r.tpr);
    j["realized_fpr"] = JsonNumber(r.realized_fpr);
    j["threshold"] = JsonNumber(r.threshold);
    j["n_in"] = r.n_in;
    j["n_out"] = r.n_out;
    j["degenerate_columns"] = r.degenerate_columns;
    j["score_space"] = ScoreSpaceName(r.space);
    j["status"] = EvalStatusName(r.status);
    out.push_back(std::move(j));
  }
  return out;
}

std::string FprDistributionCsv(std::span<const SampleFpr> fprs,
                               Strategy strategy, double alpha, bool header) {
  std::string out = header ? "sample_id,fpr_x,strategy,alpha\n" : "";
  const std::string suffix =
      "," + StrategyName(strategy) + "," + FormatDouble(alpha) + "\n";
  for (const SampleFpr& f : fprs) {
    out += f.sample_id + "," + FormatDouble(f.fpr) + suffix;
  }
  return out;
}

}  // namespace mia
