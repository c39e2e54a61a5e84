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

#ifndef MIA_AUDIT_GRID_H_
#define MIA_AUDIT_GRID_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

namespace mia {

// M x N matrix of membership-inference scores. Row m holds the scores that
// model m assigns to each of the N samples; mask(m, x) is true when sample x
// was in the training set of model m. Storage is row-major.
//
// A constructed grid is always valid: identical score/mask shapes, M >= 1,
// N >= 1, finite scores and 0/1 mask bytes. The object is immutable.
class MiaGrid {
 public:
  MiaGrid(std::size_t models, std::size_t samples, std::vector<double> scores,
          std::vector<std::uint8_t> mask,
          std::vector<std::string> sample_ids = {},
          nlohmann::json meta = nlohmann::json::object());

  std::size_t models() const { return models_; }
  std::size_t samples() const { return samples_; }

  double score(std::size_t m, std::size_t x) const {
    return scores_[m * samples_ + x];
  }
  bool member(std::size_t m, std::size_t x) const {
    return mask_[m * samples_ + x] != 0;
  }

  std::span<const double> scores() const { return scores_; }
  std::span<const std::uint8_t> mask() const { return mask_; }
  std::span<const double> row_scores(std::size_t m) const {
    return std::span<const double>(scores_).subspan(m * samples_, samples_);
  }
  std::span<const std::uint8_t> row_mask(std::size_t m) const {
    return std::span<const std::uint8_t>(mask_).subspan(m * samples_,
                                                       samples_);
  }

  // Explicit ids when present, otherwise the column index as a string.
  bool has_sample_ids() const { return !sample_ids_.empty(); }
  const std::vector<std::string>& sample_ids() const { return sample_ids_; }
  std::string sample_id(std::size_t x) const;

  const nlohmann::json& meta() const { return meta_; }

  // Number of models for which column x is a member / non-member.
  std::size_t members_in_column(std::size_t x) const;

  friend bool operator==(const MiaGrid& a, const MiaGrid& b);

 private:
  std::size_t models_;
  std::size_t samples_;
  std::vector<double> scores_;
  std::vector<std::uint8_t> mask_;
  std::vector<std::string> sample_ids_;
  nlohmann::json meta_;
};

enum class GridFormat { kCsv, kBinary };

GridFormat ParseGridFormat(const std::string& name);

// Binary files are a single `.miag` file. CSV grids are a directory holding
// scores.csv and mask.csv.
MiaGrid LoadGrid(const std::filesystem::path& path, GridFormat format);
void SaveGrid(const MiaGrid& grid, const std::filesystem::path& path,
              GridFormat format);

// Picks the format from the path: a directory means CSV, anything else is
// read as binary.
MiaGrid LoadGridAuto(const std::filesystem::path& path);

MiaGrid LoadGridCsv(const std::filesystem::path& scores_csv,
                    const std::filesystem::path& mask_csv);
void SaveGridCsv(const MiaGrid& grid, const std::filesystem::path& scores_csv,
                 const std::filesystem::path& mask_csv);

// In-memory binary codec, byte-for-byte identical to the file contents.
std::vector<std::uint8_t> EncodeBinary(const MiaGrid& grid);
MiaGrid DecodeBinary(std::span<const std::uint8_t> bytes);

struct ModelSelection {
  enum class Kind { kFirst, kSeededRandom };
  Kind kind = Kind::kFirst;
  std::uint64_t seed = 0;

  static ModelSelection First() { return {}; }
  static ModelSelection Random(std::uint64_t seed) {
    return {Kind::kSeededRandom, seed};
  }
};

// Row indices chosen by `selection`, in ascending order.
std::vector<std::size_t> SelectModels(std::size_t total, std::size_t m_prime,
                                      const ModelSelection& selection);

// Grid restricted to m_prime rows. Seeded-random subsets keep the original
// relative row order.
MiaGrid SubsetModels(const MiaGrid& grid, std::size_t m_prime,
                     const ModelSelection& selection = ModelSelection::First());

// Grid restricted to the listed rows, in the listed order.
MiaGrid SelectRows(const MiaGrid& grid, std::span<const std::size_t> rows);

}  // namespace mia

#endif  // MIA_AUDIT_GRID_H_
