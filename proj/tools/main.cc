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

// mia-audit: score-grid simulation, per-sample calibration and evaluation.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "manifest.h"
#include "mia_audit/calibration.h"
#include "mia_audit/error.h"
#include "mia_audit/fp_sim.h"
#include "mia_audit/grid.h"
#include "mia_audit/shadow_stats.h"
#include "mia_audit/synthetic.h"
#include "mia_audit/tradeoff.h"
#include "mia_audit/version.h"

namespace fs = std::filesystem;

namespace mia::tools {
namespace {

struct Common {
  std::string out;
  std::uint64_t seed = 0;
  std::string format = "binary";
};

std::string GridFileName(GridFormat f) {
  return f == GridFormat::kBinary ? "grid.miag" : "grid";
}

std::vector<std::string> Split(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) parts.push_back(item);
  }
  return parts;
}

std::vector<double> ParseAlphas(const std::string& s) {
  std::vector<double> alphas;
  for (const auto& part : Split(s)) {
    double a = 0.0;
    try {
      std::size_t used = 0;
      a = std::stod(part, &used);
      if (used != part.size()) throw std::invalid_argument(part);
    } catch (const std::exception&) {
      throw InvalidArgument("cannot parse alpha '" + part + "'");
    }
    if (!(a > 0.0 && a < 1.0)) {
      throw InvalidArgument("alpha must lie in (0, 1), got " + part);
    }
    alphas.push_back(a);
  }
  if (alphas.empty()) throw InvalidArgument("no alphas given");
  return alphas;
}

std::vector<Strategy> ParseStrategies(const std::string& s) {
  std::vector<Strategy> out;
  for (const auto& part : Split(s)) out.push_back(ParseStrategy(part));
  if (out.empty()) throw InvalidArgument("no strategies given");
  return out;
}

std::string JoinArgs(int argc, char** argv) {
  std::string s;
  for (int i = 0; i < argc; ++i) {
    if (i) s += ' ';
    s += argv[i];
  }
  return s;
}

// Flags shared by estimate, evaluate and fpr-dist.
struct EstimationFlags {
  std::string variance = "per-distribution";
  bool fpc = false;
  std::int64_t n_train = 0;
  std::int64_t n_full = 0;

  void Register(CLI::App* app) {
    app->add_option("--variance", variance,
                    "Variance model: per-distribution or global")
        ->capture_default_str();
    app->add_flag("--fpc", fpc,
                  "Inflate sigma by 1/sqrt(1 - n_train/n_full); sizes come "
                  "from --n-train/--n-full or the grid metadata");
    app->add_option("--n-train", n_train, "Training-set size N for --fpc");
    app->add_option("--n-full", n_full, "Superset size N+ for --fpc");
  }

  EstimationOptions Resolve(const MiaGrid& grid) const {
    EstimationOptions o;
    o.variance = ParseVarianceModel(variance);
    if (!fpc) {
      if (n_train || n_full) {
        throw InvalidArgument("--n-train/--n-full given without --fpc");
      }
      return o;
    }
    FpcSpec spec{n_train, n_full};
    const auto& meta = grid.meta();
    if (spec.n_train == 0 && meta.contains("N_train")) {
      spec.n_train = meta["N_train"].get<std::int64_t>();
    }
    if (spec.n_full == 0 && meta.contains("N_full")) {
      spec.n_full = meta["N_full"].get<std::int64_t>();
    }
    if (spec.n_train == 0 || spec.n_full == 0) {
      throw InvalidArgument(
          "--fpc needs --n-train and --n-full (grid metadata has none)");
    }
    FinitePopulationCorrection(spec.n_train, spec.n_full);
    o.fpc = spec;
    return o;
  }

  nlohmann::json ToJson(const EstimationOptions& o) const {
    nlohmann::json j = {{"variance", VarianceModelName(o.variance)},
                        {"fpc", o.fpc.has_value()}};
    if (o.fpc) {
      j["n_train"] = o.fpc->n_train;
      j["n_full"] = o.fpc->n_full;
    }
    return j;
  }
};

ModelSelection ParseSelection(const std::string& name, std::uint64_t seed) {
  if (name == "first") return ModelSelection::First();
  if (name == "random") return ModelSelection::Random(seed);
  throw InvalidArgument("unknown selection '" + name +
                        "' (expected first or random)");
}

// --- simulate ---------------------------------------------------------------

struct SimulateCmd {
  std::string config_path;
  SimConfig config;

  void Register(CLI::App* app) {
    app->add_option("--config", config_path,
                    "JSON file with n_full, n_train, dim, sigma, n_models, "
                    "seed, with_replacement; flags override it");
    app->add_option("--n-full", config.n_full, "Superset size N+")
        ->capture_default_str();
    app->add_option("--n-train", config.n_train, "Per-model training size N")
        ->capture_default_str();
    app->add_option("--dim", config.dim, "Dimension d")->capture_default_str();
    app->add_option("--sigma", config.sigma, "Population standard deviation")
        ->capture_default_str();
    app->add_option("--models", config.n_models, "Number of models M")
        ->capture_default_str();
    app->add_flag("--with-replacement", config.with_replacement,
                  "Draw training sets with replacement (iid baseline)");
  }

  void Run(const Common& common, CLI::App* app, RunManifest& manifest) {
    SimConfig c = config;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw IoError("cannot read " + config_path);
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(in);
      } catch (const nlohmann::json::exception& e) {
        throw FormatError(config_path + ": " + e.what());
      }
      c = SimConfig::FromJson(j);
      manifest.AddInput(config_path);
      if (app->count("--n-full")) c.n_full = config.n_full;
      if (app->count("--n-train")) c.n_train = config.n_train;
      if (app->count("--dim")) c.dim = config.dim;
      if (app->count("--sigma")) c.sigma = config.sigma;
      if (app->count("--models")) c.n_models = config.n_models;
      if (app->count("--with-replacement")) c.with_replacement = true;
    }
    const bool seed_flag = app->get_parent()->get_option("--seed")->count() > 0;
    if (config_path.empty() || seed_flag) c.seed = common.seed;
    c.Validate();
    const GridFormat format = ParseGridFormat(common.format);
    manifest.SetConfig({{"sim", c.ToJson()}, {"format", common.format}});

    const SimOutput sim = Simulate(c);
    const std::string grid_name = GridFileName(format);
    SaveGrid(sim.grid, manifest.out_dir() / grid_name, format);
    manifest.AddOutput(grid_name);

    const RatioSummary summary = SummarizeRatios(sim.result);
    manifest.WriteOutput("sim.csv", SimResultCsv(sim.result));
    nlohmann::json summary_json = SimSummaryJson(sim.result, summary);
    if (!c.with_replacement) {
      const SimResult corrected = BuildSimResult(
          c, SimNorms(sim.grid),
          ApplyFpc(EstimateStats(sim.grid), c.n_train, c.n_full));
      const RatioSummary corrected_summary = SummarizeRatios(corrected);
      manifest.WriteOutput("sim_fpc.csv", SimResultCsv(corrected));
      summary_json["fpc_corrected_summary"] =
          SimSummaryJson(corrected, corrected_summary);
    }
    manifest.WriteOutput("summary.json", summary_json.dump(2) + "\n");
    std::cout << "mean_ratio_in=" << summary.mean_ratio_in
              << " mean_ratio_out=" << summary.mean_ratio_out << "\n";
  }
};

// --- synth ------------------------------------------------------------------

struct SynthCmd {
  std::string kind = "heterogeneous";
  SyntheticConfig config;
  double delta = 2.0;
  double sigma_lo = 0.1;
  double sigma_hi = 10.0;

  void Register(CLI::App* app) {
    app->add_option("--kind", kind, "heterogeneous or equal-variance")
        ->capture_default_str();
    app->add_option("--models", config.models, "Rows M")->capture_default_str();
    app->add_option("--samples", config.samples, "Columns N")
        ->capture_default_str();
    app->add_option("--membership", config.membership_prob,
                    "Membership probability per entry")
        ->capture_default_str();
    app->add_option("--delta", delta, "Standardized gap (equal-variance)")
        ->capture_default_str();
    app->add_option("--sigma-lo", sigma_lo, "Smallest column spread")
        ->capture_default_str();
    app->add_option("--sigma-hi", sigma_hi, "Largest column spread")
        ->capture_default_str();
  }

  void Run(const Common& common, RunManifest& manifest) {
    SyntheticConfig c = config;
    c.seed = common.seed;
    const GridFormat format = ParseGridFormat(common.format);
    std::optional<MiaGrid> grid;
    nlohmann::json cfg = {{"kind", kind},
                          {"models", c.models},
                          {"samples", c.samples},
                          {"membership", c.membership_prob},
                          {"seed", c.seed},
                          {"format", common.format}};
    if (kind == "heterogeneous") {
      grid.emplace(HeterogeneousLiraGrid(c, sigma_lo, sigma_hi));
      cfg["sigma_lo"] = sigma_lo;
      cfg["sigma_hi"] = sigma_hi;
    } else if (kind == "equal-variance") {
      grid.emplace(EqualVarianceGrid(c, delta));
      cfg["delta"] = delta;
    } else {
      throw InvalidArgument("unknown synthetic kind '" + kind + "'");
    }
    manifest.SetConfig(cfg);
    const std::string grid_name = GridFileName(format);
    SaveGrid(*grid, manifest.out_dir() / grid_name, format);
    manifest.AddOutput(grid_name);
  }
};

// --- estimate ---------------------------------------------------------------

struct EstimateCmd {
  std::string grid_path;
  std::optional<std::size_t> exclude_row;
  EstimationFlags estimation;

  void Register(CLI::App* app) {
    app->add_option("--grid", grid_path, "Grid file (.miag) or CSV directory")
        ->required();
    app->add_option("--exclude-row", exclude_row,
                    "Fit without this row (leave-one-out view)");
    estimation.Register(app);
  }

  void Run(RunManifest& manifest) {
    const MiaGrid grid = LoadGridAuto(grid_path);
    manifest.AddInput(grid_path);
    const EstimationOptions opts = estimation.Resolve(grid);
    nlohmann::json cfg = {{"grid", grid_path},
                          {"estimation", estimation.ToJson(opts)}};
    PerSampleStats stats;
    if (exclude_row) {
      if (*exclude_row >= grid.models()) {
        throw InvalidArgument("--exclude-row out of range");
      }
      cfg["exclude_row"] = *exclude_row;
      stats = EstimateStatsExcludingRow(grid, *exclude_row, opts);
    } else {
      stats = EstimateStats(grid, opts);
    }
    manifest.SetConfig(cfg);
    manifest.WriteOutput("stats.json", StatsToJson(stats).dump(2) + "\n");
    std::cout << "columns=" << stats.size()
              << " degenerate=" << stats.degenerate_count() << "\n";
  }
};

// --- evaluate ---------------------------------------------------------------

std::vector<std::size_t> DefaultMPrimes(std::size_t m) {
  std::vector<std::size_t> out;
  for (std::size_t p = 4; p < m; p *= 2) out.push_back(p);
  out.push_back(m);
  return out;
}

struct EvalFlags {
  std::string grid_path;
  std::string mode = "loo";
  std::string selection = "first";
  EstimationFlags estimation;

  void Register(CLI::App* app) {
    app->add_option("--grid", grid_path, "Grid file (.miag) or CSV directory")
        ->required();
    app->add_option("--mode", mode, "loo, oracle or pooled")
        ->capture_default_str();
    app->add_option("--selection", selection,
                    "Target-row choice: first or random (uses --seed)")
        ->capture_default_str();
    estimation.Register(app);
  }
};

struct EvaluateCmd {
  EvalFlags flags;
  std::string alphas = "0.001,0.01,0.1";
  std::string strategies = "naive,pp,per-sample,pp-normal,pp-t,per-sample-normal";
  std::vector<std::size_t> m_values;

  void Register(CLI::App* app) {
    flags.Register(app);
    app->add_option("--alphas", alphas, "Comma-separated target FPRs")
        ->capture_default_str();
    app->add_option("--strategies", strategies, "Comma-separated strategies")
        ->capture_default_str();
    app->add_option("--target-models,--m-values", m_values,
                    "M' values (comma-separated); default powers of two "
                    "from 4 up to M, plus M")
        ->delimiter(',');
  }

  void Run(const Common& common, RunManifest& manifest) {
    const auto alpha_list = ParseAlphas(alphas);
    const auto strategy_list = ParseStrategies(strategies);
    const MiaGrid grid = LoadGridAuto(flags.grid_path);
    manifest.AddInput(flags.grid_path);

    CalibrationOptions opts;
    opts.mode = ParseEstimationMode(flags.mode);
    opts.selection = ParseSelection(flags.selection, common.seed);
    opts.estimation = flags.estimation.Resolve(grid);
    std::vector<std::size_t> ms =
        m_values.empty() ? DefaultMPrimes(grid.models()) : m_values;
    for (std::size_t m : ms) {
      if (m < 1 || m > grid.models()) {
        throw InvalidArgument("M' = " + std::to_string(m) +
                              " outside [1, " + std::to_string(grid.models()) +
                              "]");
      }
    }
    std::vector<std::string> names;
    for (Strategy s : strategy_list) names.push_back(StrategyName(s));
    manifest.SetConfig({{"grid", flags.grid_path},
                        {"mode", EstimationModeName(opts.mode)},
                        {"selection", flags.selection},
                        {"seed", common.seed},
                        {"alphas", alpha_list},
                        {"strategies", names},
                        {"m_values", ms},
                        {"estimation", flags.estimation.ToJson(opts.estimation)}});

    std::vector<EvalRow> rows;
    for (std::size_t m : ms) {
      opts.target_models = m;
      const CalibratedGrid calibrated = Calibrate(grid, opts);
      const Evaluator evaluator(calibrated);
      for (Strategy s : strategy_list) {
        for (double a : alpha_list) rows.push_back(evaluator.Evaluate(s, a));
      }
    }
    manifest.WriteOutput("report.csv", EvalReportCsv(rows));
    manifest.WriteOutput("report.json", EvalReportJson(rows).dump(2) + "\n");
    std::cout << rows.size() << " rows\n";
  }
};

// --- fpr-dist ---------------------------------------------------------------

struct FprDistCmd {
  EvalFlags flags;
  std::string alphas = "0.001,0.01,0.1";
  std::string strategies = "naive,pp,per-sample";
  std::size_t target_models = 0;

  void Register(CLI::App* app) {
    flags.Register(app);
    app->add_option("--alpha,--alphas", alphas, "Comma-separated target FPRs")
        ->capture_default_str();
    app->add_option("--strategy,--strategies", strategies,
                    "Comma-separated strategies")
        ->capture_default_str();
    app->add_option("--target-models", target_models,
                    "M' rows to evaluate (0 = all)")
        ->capture_default_str();
  }

  void Run(const Common& common, RunManifest& manifest) {
    const auto alpha_list = ParseAlphas(alphas);
    const auto strategy_list = ParseStrategies(strategies);
    const MiaGrid grid = LoadGridAuto(flags.grid_path);
    manifest.AddInput(flags.grid_path);
    if (target_models > grid.models()) {
      throw InvalidArgument("--target-models exceeds the grid's rows");
    }
    CalibrationOptions opts;
    opts.mode = ParseEstimationMode(flags.mode);
    opts.selection = ParseSelection(flags.selection, common.seed);
    opts.estimation = flags.estimation.Resolve(grid);
    opts.target_models = target_models;
    std::vector<std::string> names;
    for (Strategy s : strategy_list) names.push_back(StrategyName(s));
    manifest.SetConfig({{"grid", flags.grid_path},
                        {"mode", EstimationModeName(opts.mode)},
                        {"selection", flags.selection},
                        {"seed", common.seed},
                        {"alphas", alpha_list},
                        {"strategies", names},
                        {"target_models", target_models},
                        {"estimation", flags.estimation.ToJson(opts.estimation)}});

    const CalibratedGrid calibrated = Calibrate(grid, opts);
    const Evaluator evaluator(calibrated);
    std::string csv;
    bool header = true;
    for (Strategy s : strategy_list) {
      for (double a : alpha_list) {
        const auto fprs = evaluator.PerSampleFpr(s, a);
        std::vector<SampleFpr> rows;
        for (std::size_t c = 0; c < fprs.size(); ++c) {
          rows.push_back({evaluator.column_ids()[c], fprs[c]});
        }
        csv += FprDistributionCsv(rows, s, a, header);
        header = false;
      }
    }
    manifest.WriteOutput("fpr_dist.csv", csv);
  }
};

// --- tradeoff ---------------------------------------------------------------

struct TradeoffCmd {
  std::optional<double> gaussian_delta;
  std::string alpha_grid;
  std::string grid_path;
  std::string column;

  void Register(CLI::App* app) {
    app->add_option("--gaussian-delta", gaussian_delta,
                    "Analytic curve between N(0,1) and N(delta,1)");
    app->add_option("--alpha-grid", alpha_grid,
                    "Alphas for the analytic curve; default 0.001..0.999 "
                    "in steps of 0.001");
    app->add_option("--grid", grid_path,
                    "Grid for an empirical curve of one column");
    app->add_option("--column", column, "Sample id or column index");
  }

  void Run(RunManifest& manifest) {
    TradeoffCurve curve;
    if (gaussian_delta.has_value() == !grid_path.empty()) {
      throw InvalidArgument("give exactly one of --gaussian-delta or --grid");
    }
    if (gaussian_delta) {
      std::vector<double> alphas;
      if (alpha_grid.empty()) {
        for (int i = 1; i < 1000; ++i) alphas.push_back(i / 1000.0);
      } else {
        alphas = ParseAlphas(alpha_grid);
      }
      curve = GaussianTradeoffCurve(*gaussian_delta, alphas);
      manifest.SetConfig({{"gaussian_delta", *gaussian_delta},
                          {"alphas", alphas}});
    } else {
      if (column.empty()) throw InvalidArgument("--grid needs --column");
      const MiaGrid grid = LoadGridAuto(grid_path);
      manifest.AddInput(grid_path);
      std::optional<std::size_t> x;
      for (std::size_t i = 0; i < grid.samples() && !x; ++i) {
        if (grid.sample_id(i) == column) x = i;
      }
      if (!x) throw InvalidArgument("no column '" + column + "' in the grid");
      std::vector<double> out, in;
      for (std::size_t m = 0; m < grid.models(); ++m) {
        (grid.member(m, *x) ? in : out).push_back(grid.score(m, *x));
      }
      curve = EmpiricalTradeoff(out, in);
      manifest.SetConfig({{"grid", grid_path}, {"column", column}});
    }
    manifest.WriteOutput("curve.csv", TradeoffCurveCsv(curve));
  }
};

int Main(int argc, char** argv) {
  CLI::App app{"mia-audit: per-sample calibrated evaluation of membership "
               "inference score grids"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  Common common;
  app.add_option("--out", common.out, "Output directory for this run");
  app.add_option("--seed", common.seed, "Seed for simulation and selection")
      ->capture_default_str();
  app.add_option("--format", common.format, "Grid format: csv or binary")
      ->capture_default_str();
  // Accept the common flags after the subcommand name as well.
  app.fallthrough();

  SimulateCmd simulate;
  SynthCmd synth;
  EstimateCmd estimate;
  EvaluateCmd evaluate;
  FprDistCmd fpr_dist;
  TradeoffCmd tradeoff;
  auto* sim_app = app.add_subcommand(
      "simulate", "Mean-model simulation of efficient LiRA");
  simulate.Register(sim_app);
  synth.Register(app.add_subcommand("synth", "Synthetic Gaussian score grid"));
  estimate.Register(app.add_subcommand("estimate", "Per-sample in/out fits"));
  evaluate.Register(app.add_subcommand(
      "evaluate", "TPR at target FPR for strategy x alpha x M' cells"));
  fpr_dist.Register(app.add_subcommand(
      "fpr-dist", "Per-sample FPR at each strategy's threshold"));
  tradeoff.Register(app.add_subcommand("tradeoff", "Trade-off curve CSV"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  CLI::App* sub = app.get_subcommands().front();
  try {
    if (common.out.empty()) throw InvalidArgument("--out is required");
    ParseGridFormat(common.format);
    RunManifest manifest(JoinArgs(argc, argv), common.out);
    const std::string name = sub->get_name();
    if (name == "simulate") {
      simulate.Run(common, sim_app, manifest);
    } else if (name == "synth") {
      synth.Run(common, manifest);
    } else if (name == "estimate") {
      estimate.Run(manifest);
    } else if (name == "evaluate") {
      evaluate.Run(common, manifest);
    } else if (name == "fpr-dist") {
      fpr_dist.Run(common, manifest);
    } else {
      tradeoff.Run(manifest);
    }
    manifest.Finish();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace
}  // namespace mia::tools

int main(int argc, char** argv) { return mia::tools::Main(argc, argv); }
