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

#ifndef MIA_AUDIT_SYNTHETIC_H_
#define MIA_AUDIT_SYNTHETIC_H_

#include <cstddef>
#include <cstdint>

#include "mia_audit/grid.h"

namespace mia {

// Gaussian score grids with known per-column in/out distributions.
//
// Column parameters come from stream 0 of Rng::ForStream(seed, .), column
// by column. Row m uses stream m + 1 and, per column, draws one Uniform()
// for membership (member when < membership_prob) and then one Normal().
struct SyntheticConfig {
  std::size_t models = 256;
  std::size_t samples = 64;
  double membership_prob = 0.5;
  std::uint64_t seed = 0;
};

// Columns of LiRA log-likelihood-ratio scores: with s_x log-uniform on
// [sigma_lo, sigma_hi], out ~ N(-s_x^2 / 2, s_x^2) and in ~ N(s_x^2 / 2,
// s_x^2). Spread and effect size both grow with s_x, as for real LiRA
// scores of hard and easy samples.
MiaGrid HeterogeneousLiraGrid(const SyntheticConfig& config,
                              double sigma_lo = 0.1, double sigma_hi = 10.0);

// Columns with out ~ N(mu_x, s_x^2) and in ~ N(mu_x + delta * s_x, s_x^2),
// mu_x uniform on [-5, 5] and s_x log-uniform on [0.5, 2]: every column
// separates by exactly delta after standardization.
MiaGrid EqualVarianceGrid(const SyntheticConfig& config, double delta);

}  // namespace mia

#endif  // MIA_AUDIT_SYNTHETIC_H_
