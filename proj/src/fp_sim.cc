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

#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "mia_audit/error.h"
#include "mia_audit/format.h"
#include "mia_audit/parallel.h"
#include "mia_audit/random.h"

namespace mia {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double Ratio(double emp, double ana) {
  const double r = emp / ana;
  return std::isfinite(r) ? r : kNaN;
}

}  // namespace

void SimConfig::Validate() const {
  if (n_full < 1) throw InvalidArgument("n_full must be >= 1");
  if (n_train < 1) throw InvalidArgument("n_train must be >= 1");
  if (!with_replacement && n_train >= n_full) {
    throw InvalidArgument("n_train must be < n_full when sampling without "
                          "replacement (got n_train=" + std::to_string(n_train) +
                          ", n_full=" + std::to_string(n_full) + ")");
  }
  if (dim < 1) throw InvalidArgument("dim must be >= 1");
  // sigma = 0 is accepted: it gives the all-zero population.
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw InvalidArgument("sigma must be finite and >= 0");
  }
  if (n_models < 2) {
    throw InvalidArgument("n_models must be >= 2 (got " +
                          std::to_string(n_models) + ")");
  }
}

nlohmann::json SimConfig::ToJson() const {
  return {{"n_full", n_full},   {"n_train", n_train},
          {"dim", dim},         {"sigma", sigma},
          {"n_models", n_models}, {"seed", seed},
          {"with_replacement", with_replacement}};
}

SimConfig SimConfig::FromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw InvalidArgument("sim config must be a JSON object");
  SimConfig c;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "n_full") {
        c.n_full = value.get<std::int64_t>();
      } else if (key == "n_train") {
        c.n_train = value.get<std::int64_t>();
      } else if (key == "dim") {
        c.dim = value.get<std::int64_t>();
      } else if (key == "sigma") {
        c.sigma = value.get<double>();
      } else if (key == "n_models") {
        c.n_models = value.get<std::int64_t>();
      } else if (key == "seed") {
        c.seed = value.get<std::uint64_t>();
      } else if (key == "with_replacement") {
        c.with_replacement = value.get<bool>();
      } else {
        throw InvalidArgument("unknown sim config key '" + key + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument("sim config key '" + key + "': " + e.what());
    }
  }
  return c;
}

double AnalyticSigma(double norm_x, std::int64_t n_train, double sigma,
                     Membership membership) {
  if (!(norm_x >= 0.0) || !std::isfinite(norm_x)) {
    throw InvalidArgument("norm_x must be finite and >= 0");
  }
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw InvalidArgument("sigma must be finite and >= 0");
  }
  const double n = static_cast<double>(n_train);
  if (membership == Membership::kOut) {
    if (n_train < 1) throw InvalidArgument("n_train must be >= 1");
    return sigma * norm_x / std::sqrt(n);
  }
  if (n_train < 2) throw InvalidArgument("n_train must be >= 2 for in");
  return sigma * norm_x * std::sqrt(n - 1.0) / n;
}

SimOutput Simulate(const SimConfig& config) {
  config.Validate();
  const auto n_full = static_cast<std::size_t>(config.n_full);
  const auto n_train = static_cast<std::size_t>(config.n_train);
  const auto dim = static_cast<std::size_t>(config.dim);
  const auto models = static_cast<std::size_t>(config.n_models);

  std::vector<double> points(n_full * dim);
  {
    Rng rng = Rng::ForStream(config.seed, 0);
    for (double& v : points) v = config.sigma * rng.Normal();
  }
  std::vector<double> norms(n_full);
  for (std::size_t i = 0; i < n_full; ++i) {
    double ss = 0.0;
    for (std::size_t k = 0; k < dim; ++k) ss += points[i * dim + k] * points[i * dim + k];
    norms[i] = std::sqrt(ss);
  }

  std::vector<double> scores(models * n_full);
  std::vector<std::uint8_t> mask(models * n_full, 0);
  ParallelFor(models, [&](std::size_t m) {
    Rng rng = Rng::ForStream(config.seed, m + 1);
    std::vector<std::size_t> chosen;
    if (config.with_replacement) {
      chosen.resize(n_train);
      for (auto& c : chosen) c = static_cast<std::size_t>(rng.Below(n_full));
    } else {
      std::vector<std::size_t> idx(n_full);
      std::iota(idx.begin(), idx.end(), std::size_t{0});
      PartialShuffle(idx, n_train, rng);
      chosen.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    }
    std::vector<double> model(dim, 0.0);
    for (std::size_t c : chosen) {
      mask[m * n_full + c] = 1;
      const double* p = &points[c * dim];
      for (std::size_t k = 0; k < dim; ++k) model[k] += p[k];
    }
    for (double& v : model) v /= static_cast<double>(n_train);
    for (std::size_t i = 0; i < n_full; ++i) {
      const double* p = &points[i * dim];
      double s = 0.0;
      for (std::size_t k = 0; k < dim; ++k) s += p[k] * model[k];
      scores[m * n_full + i] = s;
    }
  });

  nlohmann::json meta = {
      {"generator", "fp_sim"},
      {"rng", Rng::kAlgorithm},
      {"draw_order",
       "stream 0: population point-major; stream m+1: row m subset"},
      {"seed", config.seed},
      {"N_full", config.n_full},
      {"N_train", config.n_train},
      {"config", config.ToJson()},
      {"norm_x", norms},
  };
  MiaGrid grid(models, n_full, std::move(scores), std::move(mask), {},
               std::move(meta));
  SimResult result = BuildSimResult(config, norms, EstimateStats(grid));
  return {std::move(grid), std::move(result)};
}

SimResult BuildSimResult(const SimConfig& config,
                         const std::vector<double>& norms,
                         const PerSampleStats& stats) {
  if (norms.size() != stats.size()) {
    throw InvalidArgument("norm count does not match the column count");
  }
  SimResult r;
  r.config = config;
  r.fpc = config.with_replacement
              ? kNaN
              : FinitePopulationCorrection(config.n_train, config.n_full);
  r.fpc_corrected = stats.fpc_applied;
  r.samples.reserve(norms.size());
  for (std::size_t i = 0; i < norms.size(); ++i) {
    const ColumnStats& c = stats.columns[i];
    SimSample s;
    s.norm_x = norms[i];
    s.sigma_emp_in = c.sigma_in;
    s.sigma_emp_out = c.sigma_out;
    s.sigma_ana_in = config.n_train >= 2
                         ? AnalyticSigma(norms[i], config.n_train, config.sigma,
                                         Membership::kIn)
                         : kNaN;
    s.sigma_ana_out =
        AnalyticSigma(norms[i], config.n_train, config.sigma, Membership::kOut);
    s.ratio_in = Ratio(s.sigma_emp_in, s.sigma_ana_in);
    s.ratio_out = Ratio(s.sigma_emp_out, s.sigma_ana_out);
    r.samples.push_back(s);
  }
  return r;
}

std::vector<double> SimNorms(const MiaGrid& grid) {
  const auto& meta = grid.meta();
  if (!meta.contains("norm_x") || !meta["norm_x"].is_array()) {
    throw InvalidArgument("grid metadata has no norm_x array");
  }
  auto norms = meta["norm_x"].get<std::vector<double>>();
  if (norms.size() != grid.samples()) {
    throw FormatError("norm_x length does not match the column count");
  }
  return norms;
}

RatioSummary SummarizeRatios(const SimResult& result) {
  RatioSummary s;
  s.hist_in.assign(RatioSummary::kBins, 0);
  s.hist_out.assign(RatioSummary::kBins, 0);
  auto add = [](double v, double& sum, std::size_t& count,
                std::vector<std::size_t>& hist, std::size_t& overflow) {
    if (!std::isfinite(v)) return;
    sum += v;
    ++count;
    if (v > RatioSummary::kHistMax) {
      ++overflow;
      return;
    }
    auto bin = static_cast<std::size_t>(v / RatioSummary::kHistMax *
                                        RatioSummary::kBins);
    hist[std::min(bin, RatioSummary::kBins - 1)] += 1;
  };
  double sum_in = 0.0;
  double sum_out = 0.0;
  for (const SimSample& x : result.samples) {
    add(x.ratio_in, sum_in, s.count_in, s.hist_in, s.overflow_in);
    add(x.ratio_out, sum_out, s.count_out, s.hist_out, s.overflow_out);
  }
  if (s.count_in == 0 && s.count_out == 0) {
    throw InvalidArgument("simulation result has no finite ratios");
  }
  s.mean_ratio_in = s.count_in ? sum_in / static_cast<double>(s.count_in) : kNaN;
  s.mean_ratio_out =
      s.count_out ? sum_out / static_cast<double>(s.count_out) : kNaN;
  return s;
}

std::string SimResultCsv(const SimResult& result) {
  std::string out =
      "sample_id,norm_x,sigma_emp_in,sigma_emp_out,sigma_ana_in,"
      "sigma_ana_out,ratio_in,ratio_out\n";
  for (std::size_t i = 0; i < result.samples.size(); ++i) {
    const SimSample& s = result.samples[i];
    out += std::to_string(i) + "," + FormatDouble(s.norm_x) + "," +
           FormatDouble(s.sigma_emp_in) + "," + FormatDouble(s.sigma_emp_out) +
           "," + FormatDouble(s.sigma_ana_in) + "," +
           FormatDouble(s.sigma_ana_out) + "," + FormatDouble(s.ratio_in) +
           "," + FormatDouble(s.ratio_out) + "\n";
  }
  return out;
}

nlohmann::json SimSummaryJson(const SimResult& result,
                              const RatioSummary& summary) {
  std::vector<double> edges;
  for (std::size_t b = 0; b <= RatioSummary::kBins; ++b) {
    edges.push_back(RatioSummary::kHistMax * static_cast<double>(b) /
                    RatioSummary::kBins);
  }
  return {
      {"config", result.config.ToJson()},
      {"fpc", JsonNumber(result.fpc)},
      {"sqrt_fpc", JsonNumber(std::sqrt(result.fpc))},
      {"fpc_corrected", result.fpc_corrected},
      {"samples", result.samples.size()},
      {"mean_ratio_in", JsonNumber(summary.mean_ratio_in)},
      {"mean_ratio_out", JsonNumber(summary.mean_ratio_out)},
      {"count_in", summary.count_in},
      {"count_out", summary.count_out},
      {"hist_edges", edges},
      {"hist_in", summary.hist_in},
      {"hist_out", summary.hist_out},
      {"overflow_in", summary.overflow_in},
      {"overflow_out", summary.overflow_out},
  };
}

}  // namespace mia
