#
# Copyright 2026 The mia-audit Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#

"""Membership-inference calibration audit tools.

Thin Python layer over the compiled ``_core`` module.
"""

import json

from . import _core
from ._core import (  # noqa: F401
    CalibratedGrid,
    Error,
    Evaluator,
    FormatError,
    Grid,
    InvalidArgument,
    IoError,
    analytic_sigma,
    calibrate,
    empirical_tradeoff,
    fit_student_t,
    gaussian_tradeoff,
    load_grid,
    normal_cdf,
    normal_quantile,
    normal_sf,
    save_grid,
    student_t_cdf,
    student_t_quantile,
    synthetic_grid,
)

__version__ = _core.__version__

STRATEGIES = ("naive", "pp", "per-sample", "pp-normal", "pp-t",
              "per-sample-normal")


def grid_meta(grid):
    return json.loads(grid.meta_json)


def estimate_stats(grid, exclude_row=None, variance="per-distribution",
                   n_train=None, n_full=None):
    """Per-column fits as a list of dicts (NaN fields come back as None)."""
    return json.loads(_core.estimate_stats_json(
        grid, exclude_row=exclude_row, variance=variance, n_train=n_train,
        n_full=n_full))


def simulate(**config):
    """Runs the mean-model simulator; returns (grid, result dict)."""
    grid, raw = _core.simulate(json.dumps(config))
    result = {
        "config": json.loads(raw["config_json"]),
        "fpc": raw["fpc"],
        "csv": raw["csv"],
        "summary": json.loads(raw["summary_json"]),
    }
    return grid, result


def evaluate(grid, strategies=STRATEGIES, alphas=(0.001, 0.01, 0.1),
             **calibrate_kwargs):
    cal = calibrate(grid, **calibrate_kwargs)
    ev = Evaluator(cal)
    return [ev.evaluate(s, a) for s in strategies for a in alphas]
