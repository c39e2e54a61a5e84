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

#ifndef MIA_AUDIT_CALIBRATION_H_
#define MIA_AUDIT_CALIBRATION_H_

#include <array>
#include <cstddef>
#include <cstdint>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mia_audit/grid.h"
#include "mia_audit/numerics.h"
#include "mia_audit/shadow_stats.h"

namespace mia {

enum class Strategy {
  kConcatNaive,         // pooled raw scores, empirical threshold
  kConcatPP,            // pooled standardized scores, empirical threshold
  kAvgPerSample,        // per-column empirical thresholds, averaged TPR_x
  kConcatPPNormal,      // pooled standardized scores, Phi^{-1}(1 - alpha)
  kConcatPPStudentT,    // pooled standardized scores, fitted t quantile
  kAvgPerSampleNormal,  // per-column TPR_x at Phi^{-1}(1 - alpha), averaged
};

inline constexpr std::array<Strategy, 6> kAllStrategies = {
    Strategy::kConcatNaive,        Strategy::kConcatPP,
    Strategy::kAvgPerSample,       Strategy::kConcatPPNormal,
    Strategy::kConcatPPStudentT,   Strategy::kAvgPerSampleNormal};

// CLI names: naive, pp, per-sample, pp-normal, pp-t, per-sample-normal.
Strategy ParseStrategy(const std::string& name);
std::string StrategyName(Strategy strategy);

enum class ScoreSpace { kRaw, kStandardized };
std::string ScoreSpaceName(ScoreSpace space);
ScoreSpace StrategyScoreSpace(Strategy strategy);

// Scores of the target rows after the per-sample map
//   f_x(t) = sign(delta_x) * (t - mu_out_x) / sigma_out_x,
// which sends every out-distribution to mean 0, unit spread and puts the
// in-distribution on the positive side. Columns whose fit is degenerate for
// any target row are dropped and listed in degenerate_ids(). Storage is
// row-major over (target row, kept column).
class CalibratedGrid {
 public:
  std::size_t rows() const { return rows_; }
  std::size_t columns() const { return column_index_.size(); }

  double raw(std::size_t m, std::size_t c) const {
    return raw_[m * columns() + c];
  }
  double standardized(std::size_t m, std::size_t c) const {
    return standardized_[m * columns() + c];
  }
  bool member(std::size_t m, std::size_t c) const {
    return mask_[m * columns() + c] != 0;
  }

  // Index into the source grid and sample id of kept column c.
  std::size_t source_column(std::size_t c) const { return column_index_[c]; }
  const std::vector<std::string>& column_ids() const { return column_ids_; }
  const std::vector<std::string>& degenerate_ids() const {
    return degenerate_ids_;
  }

  // Pool-level sign(delta_x) (+1 on ties) and sigma_in / sigma_out.
  int sign_delta(std::size_t c) const { return sign_delta_[c]; }
  double variance_ratio(std::size_t c) const { return variance_ratio_[c]; }

  EstimationMode mode() const { return mode_; }
  // Number of target models scored.
  std::size_t m_used() const { return rows_; }
  // Fit over the whole estimation pool (provenance).
  const PerSampleStats& pool_stats() const { return pool_stats_; }

 private:
  friend CalibratedGrid Standardize(const MiaGrid& grid,
                                    const PerSampleStats& stats);
  friend struct CalibratedGridBuilder;

  CalibratedGrid() = default;

  EstimationMode mode_ = EstimationMode::kPooled;
  std::size_t rows_ = 0;
  std::vector<std::size_t> column_index_;
  std::vector<std::string> column_ids_;
  std::vector<std::string> degenerate_ids_;
  std::vector<double> raw_;
  std::vector<double> standardized_;
  std::vector<std::uint8_t> mask_;
  std::vector<int> sign_delta_;
  std::vector<double> variance_ratio_;
  PerSampleStats pool_stats_;
};

// Applies one fit to every row of `grid`.
CalibratedGrid Standardize(const MiaGrid& grid, const PerSampleStats& stats);

struct CalibrationOptions {
  EstimationMode mode = EstimationMode::kLeaveOneOut;
  // M': rows to evaluate; 0 means every row.
  std::size_t target_models = 0;
  ModelSelection selection;
  EstimationOptions estimation;
};

// Chooses the target rows and their estimation pools:
//   kPooled       grid' = M' selected rows; every row scored with the fit
//                 over all of grid'
//   kLeaveOneOut  grid' as above; row m scored with the fit over grid'
//                 minus row m
//   kOracle       the M' selected rows are scored, each with the fit over
//                 the full grid minus that row
CalibratedGrid Calibrate(const MiaGrid& grid, const CalibrationOptions& options);

enum class EvalStatus {
  kOk,
  kLowCount,        // fewer than 10 / alpha out scores behind a threshold
  kEmptyRejection,  // no out score exceeds the threshold
  kUndefined,       // fewer than ceil(2 / alpha) out scores; tpr not reported
};
std::string EvalStatusName(EvalStatus status);

struct EvalRow {
  Strategy strategy = Strategy::kConcatNaive;
  double alpha = 0.0;
  std::size_t m_used = 0;
  double tpr = 0.0;
  double realized_fpr = 0.0;
  // Per-sample strategies report the mean of the per-column thresholds.
  double threshold = 0.0;
  std::size_t n_in = 0;
  std::size_t n_out = 0;
  std::size_t degenerate_columns = 0;
  ScoreSpace space = ScoreSpace::kRaw;
  EvalStatus status = EvalStatus::kOk;
};

// Smallest out score whose strict-exceedance fraction is <= alpha.
double EmpiricalThreshold(std::span<const double> sorted_out, double alpha);

// Positives are scores strictly above the threshold throughout. Pooled
// fractions are computed from integer counts and per-sample averages are
// summed in column order, so results do not depend on threading.
class Evaluator {
 public:
  // A grid without usable columns gives undefined rows.
  explicit Evaluator(const CalibratedGrid& grid);

  EvalRow Evaluate(Strategy strategy, double alpha) const;

  // FPR_x at the strategy's threshold for every kept column; NaN where the
  // column has no out scores or too few for a per-column threshold.
  std::vector<double> PerSampleFpr(Strategy strategy, double alpha) const;

  // Location-0 t fit to the pooled standardized out scores, computed once.
  const StudentTFit& student_t_fit() const;

  const std::vector<std::string>& column_ids() const { return column_ids_; }
  std::size_t m_used() const { return m_used_; }
  std::size_t degenerate_columns() const { return degenerate_columns_; }

 private:
  struct Column {
    std::vector<double> out_raw;
    std::vector<double> in_raw;
    std::vector<double> out_std;
    std::vector<double> in_std;
  };

  double GlobalThreshold(Strategy strategy, double alpha) const;

  std::vector<Column> columns_;
  std::vector<double> pooled_out_raw_;
  std::vector<double> pooled_out_std_;
  std::size_t n_in_ = 0;
  std::size_t n_out_ = 0;
  std::size_t m_used_ = 0;
  std::size_t degenerate_columns_ = 0;
  std::vector<std::string> column_ids_;

  mutable std::once_flag t_fit_once_;
  mutable std::optional<StudentTFit> t_fit_;
};

// Single-call form of Evaluator::Evaluate.
EvalRow Evaluate(const CalibratedGrid& grid, Strategy strategy, double alpha);

struct SampleFpr {
  std::string sample_id;
  double fpr = 0.0;
};

std::vector<SampleFpr> PerSampleFprDistribution(const CalibratedGrid& grid,
                                                Strategy strategy,
                                                double alpha);

// Pooled FPR/TPR at tau on the raw grid next to the n-weighted mean of the
// per-column rates. The two agree exactly: concatenation reports the average
// per-sample rate.
struct DecompositionCheck {
  double pooled_fpr = 0.0;
  double weighted_mean_fpr = 0.0;
  double pooled_tpr = 0.0;
  double weighted_mean_tpr = 0.0;
};

DecompositionCheck ConcatDecompositionCheck(const MiaGrid& grid, double tau);

// 1 - Phi((Phi^{-1}(1 - alpha) - delta) / ratio): power of the one-sided
// test on a standardized sample whose in-distribution is N(delta, ratio^2).
double AnalyticTprUnequalVariance(double delta_over_sigma_out,
                                  double variance_ratio, double alpha);

// Report serialization. CSV columns: strategy, alpha, m_used, tpr,
// realized_fpr, threshold, n_in, n_out, degenerate_columns.
std::string EvalReportCsv(std::span<const EvalRow> rows);
nlohmann::json EvalReportJson(std::span<const EvalRow> rows);

// CSV columns: sample_id, fpr_x, strategy, alpha.
std::string FprDistributionCsv(std::span<const SampleFpr> fprs,
                               Strategy strategy, double alpha,
                               bool header = true);

}  // namespace mia

#endif  // MIA_AUDIT_CALIBRATION_H_
