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

#ifndef MIA_AUDIT_RANDOM_H_
#define MIA_AUDIT_RANDOM_H_

#include <cstdint>
#include <random>
#include <span>

namespace mia {

// Seeded generator with a fixed, documented draw procedure so that
// simulations regenerate identically regardless of the standard library:
//   - engine: std::mt19937_64 (its output sequence is fixed by the standard)
//   - stream seeding: seed of stream k is SplitMix64(seed ^ SplitMix64(k))
//   - Uniform(): top 53 bits of one engine output, scaled to [0, 1)
//   - Normal(): Box-Muller on two Uniform() draws, cosine branch first,
//     sine branch cached for the next call
//   - Below(n): rejection sampling on the top bits (no modulo bias)
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Independent stream derived from (seed, stream).
  static Rng ForStream(std::uint64_t seed, std::uint64_t stream);

  double Uniform();
  double Normal();
  std::uint64_t Below(std::uint64_t n);

  static constexpr const char* kAlgorithm =
      "mt19937_64+splitmix64-streams+box-muller/v1";

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

std::uint64_t SplitMix64(std::uint64_t x);

// Partial Fisher-Yates: after the call the first k entries of `indices` are
// a uniformly random k-subset (in random order) of the original contents.
void PartialShuffle(std::span<std::size_t> indices, std::size_t k, Rng& rng);

}  // namespace mia

#endif  // MIA_AUDIT_RANDOM_H_
