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

#include "mia_audit/synthetic.h"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "mia_audit/error.h"
#include "mia_audit/parallel.h"
#include "mia_audit/random.h"

namespace mia {
namespace {

struct ColumnLaw {
  double mu_out;
  double mu_in;
  double sigma;
};

void CheckConfig(const SyntheticConfig& c) {
  if (c.models < 1 || c.samples < 1) {
    throw InvalidArgument("synthetic grid needs at least one row and column");
  }
  if (!(c.membership_prob > 0.0 && c.membership_prob < 1.0)) {
    throw InvalidArgument("membership_prob must lie in (0, 1)");
  }
}

double LogUniform(Rng& rng, double lo, double hi) {
  return std::exp(std::log(lo) + rng.Uniform() * (std::log(hi) - std::log(lo)));
}

MiaGrid Draw(const SyntheticConfig& c, const std::vector<ColumnLaw>& laws,
             nlohmann::json meta) {
  std::vector<double> scores(c.models * c.samples);
  std::vector<std::uint8_t> mask(c.models * c.samples);
  ParallelFor(c.models, [&](std::size_t m) {
    Rng rng = Rng::ForStream(c.seed, m + 1);
    for (std::size_t x = 0; x < c.samples; ++x) {
      const bool in = rng.Uniform() < c.membership_prob;
      const ColumnLaw& law = laws[x];
      scores[m * c.samples + x] =
          (in ? law.mu_in : law.mu_out) + law.sigma * rng.Normal();
      mask[m * c.samples + x] = in ? 1 : 0;
    }
  });
  meta["rng"] = Rng::kAlgorithm;
  meta["seed"] = c.seed;
  meta["membership_prob"] = c.membership_prob;
  return MiaGrid(c.models, c.samples, std::move(scores), std::move(mask), {},
                 std::move(meta));
}

}  // namespace

MiaGrid HeterogeneousLiraGrid(const SyntheticConfig& config, double sigma_lo,
                              double sigma_hi) {
  CheckConfig(config);
  if (!(sigma_lo > 0.0 && sigma_hi >= sigma_lo && std::isfinite(sigma_hi))) {
    throw InvalidArgument("need 0 < sigma_lo <= sigma_hi");
  }
  Rng rng = Rng::ForStream(config.seed, 0);
  std::vector<ColumnLaw> laws(config.samples);
  for (auto& law : laws) {
    const double s = LogUniform(rng, sigma_lo, sigma_hi);
    law = {-0.5 * s * s, 0.5 * s * s, s};
  }
  return Draw(config, laws,
              {{"generator", "heterogeneous-lira"},
               {"sigma_lo", sigma_lo},
               {"sigma_hi", sigma_hi}});
}

MiaGrid EqualVarianceGrid(const SyntheticConfig& config, double delta) {
  CheckConfig(config);
  if (!std::isfinite(delta)) throw InvalidArgument("delta must be finite");
  Rng rng = Rng::ForStream(config.seed, 0);
  std::vector<ColumnLaw> laws(config.samples);
  for (auto& law : laws) {
    const double mu = -5.0 + 10.0 * rng.Uniform();
    const double s = LogUniform(rng, 0.5, 2.0);
    law = {mu, mu + delta * s, s};
  }
  return Draw(config, laws,
              {{"generator", "equal-variance"}, {"delta", delta}});
}

}  // namespace mia
