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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mia_audit/calibration.h"
#include "mia_audit/error.h"
#include "mia_audit/fp_sim.h"
#include "mia_audit/grid.h"
#include "mia_audit/numerics.h"
#include "mia_audit/shadow_stats.h"
#include "mia_audit/synthetic.h"
#include "mia_audit/tradeoff.h"
#include "mia_audit/version.h"

namespace py = pybind11;

namespace {

using DoubleArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using MaskArray =
    py::array_t<std::uint8_t, py::array::c_style | py::array::forcecast>;

mia::MiaGrid MakeGrid(DoubleArray scores, MaskArray mask,
                      std::vector<std::string> sample_ids,
                      const std::string& meta_json) {
  if (scores.ndim() != 2 || mask.ndim() != 2) {
    throw mia::InvalidArgument("scores and mask must be 2-D arrays");
  }
  const auto m = static_cast<std::size_t>(scores.shape(0));
  const auto n = static_cast<std::size_t>(scores.shape(1));
  std::vector<double> s(scores.data(), scores.data() + scores.size());
  std::vector<std::uint8_t> k(mask.data(), mask.data() + mask.size());
  if (static_cast<std::size_t>(mask.shape(0)) != m ||
      static_cast<std::size_t>(mask.shape(1)) != n) {
    throw mia::InvalidArgument("scores and mask shapes differ");
  }
  return mia::MiaGrid(m, n, std::move(s), std::move(k), std::move(sample_ids),
                      nlohmann::json::parse(meta_json));
}

py::array_t<double> Scores(const mia::MiaGrid& g) {
  py::array_t<double> out({g.models(), g.samples()});
  std::copy(g.scores().begin(), g.scores().end(), out.mutable_data());
  return out;
}

py::array_t<bool> Mask(const mia::MiaGrid& g) {
  py::array_t<bool> out({g.models(), g.samples()});
  bool* d = out.mutable_data();
  for (std::size_t i = 0; i < g.mask().size(); ++i) d[i] = g.mask()[i] != 0;
  return out;
}

std::vector<std::string> SampleIds(const mia::MiaGrid& g) {
  std::vector<std::string> ids;
  for (std::size_t x = 0; x < g.samples(); ++x) ids.push_back(g.sample_id(x));
  return ids;
}

mia::EstimationOptions Estimation(const std::string& variance,
                                  std::optional<std::int64_t> n_train,
                                  std::optional<std::int64_t> n_full) {
  mia::EstimationOptions opts;
  opts.variance = mia::ParseVarianceModel(variance);
  if (n_train.has_value() != n_full.has_value()) {
    throw mia::InvalidArgument("n_train and n_full go together");
  }
  if (n_train) opts.fpc = mia::FpcSpec{*n_train, *n_full};
  return opts;
}

py::dict RowDict(const mia::EvalRow& r) {
  py::dict d;
  d["strategy"] = mia::StrategyName(r.strategy);
  d["alpha"] = r.alpha;
  d["m_used"] = r.m_used;
  d["tpr"] = r.tpr;
  d["realized_fpr"] = r.realized_fpr;
  d["threshold"] = r.threshold;
  d["n_in"] = r.n_in;
  d["n_out"] = r.n_out;
  d["degenerate_columns"] = r.degenerate_columns;
  d["score_space"] = mia::ScoreSpaceName(r.space);
  d["status"] = mia::EvalStatusName(r.status);
  return d;
}

py::list CurvePoints(const mia::TradeoffCurve& c) {
  py::list out;
  for (const auto& p : c.points) out.append(py::make_tuple(p.alpha, p.beta));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of mia_audit.";
  m.attr("__version__") = mia::kVersion;

  auto error = py::register_exception<mia::Error>(m, "Error");
  py::register_exception<mia::InvalidArgument>(m, "InvalidArgument", error);
  py::register_exception<mia::FormatError>(m, "FormatError", error);
  py::register_exception<mia::IoError>(m, "IoError", error);

  py::class_<mia::MiaGrid>(m, "Grid")
      .def(py::init(&MakeGrid), py::arg("scores"), py::arg("mask"),
           py::arg("sample_ids") = std::vector<std::string>{},
           py::arg("meta_json") = "{}")
      .def_property_readonly("models", &mia::MiaGrid::models)
      .def_property_readonly("samples", &mia::MiaGrid::samples)
      .def_property_readonly("scores", &Scores)
      .def_property_readonly("mask", &Mask)
      .def_property_readonly("sample_ids", &SampleIds)
      .def_property_readonly("meta_json",
                             [](const mia::MiaGrid& g) { return g.meta().dump(); })
      .def("subset", [](const mia::MiaGrid& g, std::size_t m_prime,
                        std::optional<std::uint64_t> seed) {
             return mia::SubsetModels(g, m_prime,
                                      seed ? mia::ModelSelection::Random(*seed)
                                           : mia::ModelSelection::First());
           },
           py::arg("m_prime"), py::arg("seed") = py::none())
      .def("to_bytes", [](const mia::MiaGrid& g) {
        const auto b = mia::EncodeBinary(g);
        return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
      })
      .def_static("from_bytes", [](const py::bytes& b) {
        const std::string s = b;
        return mia::DecodeBinary(std::span<const std::uint8_t>(
            reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
      })
      .def("__eq__", [](const mia::MiaGrid& a, const mia::MiaGrid& b) {
        return a == b;
      })
      .def("__repr__", [](const mia::MiaGrid& g) {
        return "<Grid models=" + std::to_string(g.models()) +
               " samples=" + std::to_string(g.samples()) + ">";
      });

  m.def("load_grid", &mia::LoadGridAuto, py::arg("path"),
        "Directory paths are read as CSV grids, files as .miag.");
  m.def("save_grid",
        [](const mia::MiaGrid& g, const std::filesystem::path& path,
           const std::string& format) {
          mia::SaveGrid(g, path, mia::ParseGridFormat(format));
        },
        py::arg("grid"), py::arg("path"), py::arg("format") = "binary");

  m.def("estimate_stats_json",
        [](const mia::MiaGrid& g, std::optional<std::size_t> exclude_row,
           const std::string& variance, std::optional<std::int64_t> n_train,
           std::optional<std::int64_t> n_full) {
          const auto opts = Estimation(variance, n_train, n_full);
          const auto stats = exclude_row
                                 ? mia::EstimateStatsExcludingRow(g, *exclude_row, opts)
                                 : mia::EstimateStats(g, opts);
          return mia::StatsToJson(stats).dump();
        },
        py::arg("grid"), py::arg("exclude_row") = py::none(),
        py::arg("variance") = "per-distribution",
        py::arg("n_train") = py::none(), py::arg("n_full") = py::none());

  py::class_<mia::CalibratedGrid>(m, "CalibratedGrid")
      .def_property_readonly("rows", &mia::CalibratedGrid::rows)
      .def_property_readonly("columns", &mia::CalibratedGrid::columns)
      .def_property_readonly("column_ids", &mia::CalibratedGrid::column_ids)
      .def_property_readonly("degenerate_ids",
                             &mia::CalibratedGrid::degenerate_ids)
      .def_property_readonly("mode", [](const mia::CalibratedGrid& c) {
        return mia::EstimationModeName(c.mode());
      })
      .def("standardized", [](const mia::CalibratedGrid& c) {
        py::array_t<double> out({c.rows(), c.columns()});
        double* d = out.mutable_data();
        for (std::size_t r = 0; r < c.rows(); ++r) {
          for (std::size_t k = 0; k < c.columns(); ++k) {
            *d++ = c.standardized(r, k);
          }
        }
        return out;
      });

  m.def("calibrate",
        [](const mia::MiaGrid& g, const std::string& mode,
           std::size_t target_models, std::optional<std::uint64_t> seed,
           const std::string& variance, std::optional<std::int64_t> n_train,
           std::optional<std::int64_t> n_full) {
          mia::CalibrationOptions opts;
          opts.mode = mia::ParseEstimationMode(mode);
          opts.target_models = target_models;
          if (seed) opts.selection = mia::ModelSelection::Random(*seed);
          opts.estimation = Estimation(variance, n_train, n_full);
          py::gil_scoped_release release;
          return mia::Calibrate(g, opts);
        },
        py::arg("grid"), py::arg("mode") = "loo", py::arg("target_models") = 0,
        py::arg("seed") = py::none(), py::arg("variance") = "per-distribution",
        py::arg("n_train") = py::none(), py::arg("n_full") = py::none());

  py::class_<mia::Evaluator>(m, "Evaluator")
      .def(py::init<const mia::CalibratedGrid&>(), py::keep_alive<1, 2>())
      .def("evaluate",
           [](const mia::Evaluator& e, const std::string& strategy,
              double alpha) {
             return RowDict(e.Evaluate(mia::ParseStrategy(strategy), alpha));
           },
           py::arg("strategy"), py::arg("alpha"))
      .def("per_sample_fpr",
           [](const mia::Evaluator& e, const std::string& strategy,
              double alpha) {
             return e.PerSampleFpr(mia::ParseStrategy(strategy), alpha);
           },
           py::arg("strategy"), py::arg("alpha"))
      .def_property_readonly("column_ids", &mia::Evaluator::column_ids)
      .def_property_readonly("m_used", &mia::Evaluator::m_used);

  m.def("simulate",
        [](const std::string& config_json) {
          const auto cfg = mia::SimConfig::FromJson(
              nlohmann::json::parse(config_json));
          mia::SimOutput out = [&] {
            py::gil_scoped_release release;
            return mia::Simulate(cfg);
          }();
          py::dict result;
          result["config_json"] = out.result.config.ToJson().dump();
          result["fpc"] = out.result.fpc;
          result["csv"] = mia::SimResultCsv(out.result);
          result["summary_json"] = mia::SimSummaryJson(out.result, mia::SummarizeRatios(out.result)).dump();
          return py::make_tuple(std::move(out.grid), result);
        },
        py::arg("config_json") = "{}");
  m.def("analytic_sigma", &mia::AnalyticSigma);

  m.def("synthetic_grid",
        [](const std::string& kind, std::size_t models, std::size_t samples,
           double membership_prob, std::uint64_t seed, double delta) {
          mia::SyntheticConfig cfg{models, samples, membership_prob, seed};
          if (kind == "heterogeneous") return mia::HeterogeneousLiraGrid(cfg);
          if (kind == "equal-variance") return mia::EqualVarianceGrid(cfg, delta);
          throw mia::InvalidArgument("unknown synthetic kind '" + kind + "'");
        },
        py::arg("kind") = "heterogeneous", py::arg("models") = 256,
        py::arg("samples") = 64, py::arg("membership_prob") = 0.5,
        py::arg("seed") = 0, py::arg("delta") = 1.0);

  m.def("empirical_tradeoff",
        [](std::vector<double> out, std::vector<double> in) {
          return CurvePoints(mia::EmpiricalTradeoff(out, in));
        },
        py::arg("out_scores"), py::arg("in_scores"));
  m.def("gaussian_tradeoff", &mia::GaussianTradeoff, py::arg("delta"),
        py::arg("alpha"));

  m.def("normal_cdf", &mia::NormalCdf);
  m.def("normal_sf", &mia::NormalSf);
  m.def("normal_quantile", &mia::NormalQuantile);
  m.def("student_t_cdf", &mia::StudentTCdf);
  m.def("student_t_quantile", &mia::StudentTQuantile);
  m.def("fit_student_t", [](std::vector<double> xs) {
    const auto fit = mia::FitStudentT(xs);
    return py::make_tuple(fit.df, fit.scale, fit.converged);
  });
}
