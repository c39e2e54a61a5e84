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

#include "mia_audit/grid.h"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <utility>

#include "mia_audit/error.h"
#include "mia_audit/random.h"

namespace mia {
namespace {

constexpr char kMagic[4] = {'M', 'I', 'A', 'G'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderBytes = 4 + 4 + 8 + 8;

std::string Cell(std::size_t row, std::size_t col) {
  return "(" + std::to_string(row) + "," + std::to_string(col) + ")";
}

void CheckScoresFinite(std::span<const double> scores, std::size_t samples) {
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) {
      throw FormatError("non-finite score at " +
                        Cell(i / samples, i % samples));
    }
  }
}

// Little-endian encoding independent of the host byte order.
template <typename T>
void PutLe(std::vector<std::uint8_t>& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  const U bits = std::bit_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
}

template <typename T>
T GetLe(std::span<const std::uint8_t> in, std::size_t offset) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    bits |= static_cast<U>(in[offset + i]) << (8 * i);
  }
  return std::bit_cast<T>(bits);
}

std::vector<std::string> SplitCsvLine(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream stream(line);
  while (std::getline(stream, cell, ',')) {
    const auto first = cell.find_first_not_of(" \t\r");
    const auto last = cell.find_last_not_of(" \t\r");
    cells.push_back(first == std::string::npos
                        ? std::string()
                        : cell.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool ParseDouble(const std::string& token, double& value) {
  const char* begin = token.data();
  const char* end = begin + token.size();
  if (begin != end && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  return ec == std::errc() && ptr == end && begin != end;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable ReadCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    auto cells = SplitCsvLine(line);
    if (first) {
      first = false;
      double probe = 0.0;
      if (!ParseDouble(cells.front(), probe)) {
        table.header = std::move(cells);
        continue;
      }
    }
    table.rows.push_back(std::move(cells));
  }
  if (in.bad()) throw IoError("read failure on " + path.string());
  return table;
}

std::vector<std::string> IdsFromMeta(nlohmann::json& meta,
                                     std::size_t samples) {
  std::vector<std::string> ids;
  auto it = meta.find("sample_ids");
  if (it == meta.end()) return ids;
  if (!it->is_array() || it->size() != samples) {
    throw FormatError("metadata sample_ids must be an array of N strings");
  }
  for (const auto& id : *it) {
    if (!id.is_string()) throw FormatError("sample_ids entries must be strings");
    ids.push_back(id.get<std::string>());
  }
  meta.erase(it);
  return ids;
}

void WriteFile(const std::filesystem::path& path,
               std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("write failure on " + path.string());
}

}  // namespace

MiaGrid::MiaGrid(std::size_t models, std::size_t samples,
                 std::vector<double> scores, std::vector<std::uint8_t> mask,
                 std::vector<std::string> sample_ids, nlohmann::json meta)
    : models_(models),
      samples_(samples),
      scores_(std::move(scores)),
      mask_(std::move(mask)),
      sample_ids_(std::move(sample_ids)),
      meta_(std::move(meta)) {
  if (models_ == 0 || samples_ == 0) {
    throw InvalidArgument("grid needs at least one model and one sample");
  }
  if (scores_.size() != models_ * samples_) {
    throw FormatError("scores shape does not match " +
                      std::to_string(models_) + "x" + std::to_string(samples_));
  }
  if (mask_.size() != scores_.size()) {
    throw FormatError("shape mismatch between scores and mask");
  }
  CheckScoresFinite(scores_, samples_);
  for (std::size_t i = 0; i < mask_.size(); ++i) {
    if (mask_[i] > 1) {
      throw FormatError("mask value outside {0,1} at " +
                        Cell(i / samples_, i % samples_));
    }
  }
  if (!sample_ids_.empty() && sample_ids_.size() != samples_) {
    throw InvalidArgument("sample id count does not match column count");
  }
  if (meta_.is_null()) meta_ = nlohmann::json::object();
  if (!meta_.is_object()) throw InvalidArgument("metadata must be an object");
}

std::string MiaGrid::sample_id(std::size_t x) const {
  return sample_ids_.empty() ? std::to_string(x) : sample_ids_[x];
}

std::size_t MiaGrid::members_in_column(std::size_t x) const {
  std::size_t n = 0;
  for (std::size_t m = 0; m < models_; ++m) n += mask_[m * samples_ + x];
  return n;
}

bool operator==(const MiaGrid& a, const MiaGrid& b) {
  if (a.models_ != b.models_ || a.samples_ != b.samples_) return false;
  // Bitwise score comparison so that -0.0 and 0.0 are distinguished.
  if (std::memcmp(a.scores_.data(), b.scores_.data(),
                  a.scores_.size() * sizeof(double)) != 0) {
    return false;
  }
  return a.mask_ == b.mask_ && a.sample_ids_ == b.sample_ids_ &&
         a.meta_ == b.meta_;
}

GridFormat ParseGridFormat(const std::string& name) {
  if (name == "csv") return GridFormat::kCsv;
  if (name == "binary" || name == "miag") return GridFormat::kBinary;
  throw InvalidArgument("unknown grid format '" + name +
                        "' (expected csv or binary)");
}

std::vector<std::uint8_t> EncodeBinary(const MiaGrid& grid) {
  nlohmann::json meta = grid.meta();
  if (grid.has_sample_ids()) meta["sample_ids"] = grid.sample_ids();
  const std::string meta_text = meta.dump();

  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + grid.scores().size() * 9 + 4 + meta_text.size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  PutLe(out, kVersion);
  PutLe(out, static_cast<std::uint64_t>(grid.models()));
  PutLe(out, static_cast<std::uint64_t>(grid.samples()));
  for (double v : grid.scores()) PutLe(out, v);
  out.insert(out.end(), grid.mask().begin(), grid.mask().end());
  PutLe(out, static_cast<std::uint32_t>(meta_text.size()));
  out.insert(out.end(), meta_text.begin(), meta_text.end());
  return out;
}

MiaGrid DecodeBinary(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes ||
      !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    throw FormatError("bad magic: not a MIAG grid file");
  }
  const auto version = GetLe<std::uint32_t>(bytes, 4);
  if (version != kVersion) {
    throw FormatError("unsupported MIAG version " + std::to_string(version));
  }
  const auto models = GetLe<std::uint64_t>(bytes, 8);
  const auto samples = GetLe<std::uint64_t>(bytes, 16);
  const std::uint64_t remaining = bytes.size() - kHeaderBytes;
  if (models == 0 || samples == 0 || samples > remaining / 9 ||
      models > remaining / 9 / samples) {
    throw FormatError("MIAG dimensions inconsistent with file size");
  }
  const std::size_t cells = models * samples;
  std::size_t offset = kHeaderBytes;
  std::vector<double> scores(cells);
  for (std::size_t i = 0; i < cells; ++i, offset += 8) {
    scores[i] = GetLe<double>(bytes, offset);
  }
  std::vector<std::uint8_t> mask(bytes.begin() + offset,
                                 bytes.begin() + offset + cells);
  offset += cells;
  if (bytes.size() < offset + 4) throw FormatError("truncated MIAG metadata");
  const auto meta_len = GetLe<std::uint32_t>(bytes, offset);
  offset += 4;
  if (bytes.size() != offset + meta_len) {
    throw FormatError("MIAG metadata length does not match file size");
  }
  nlohmann::json meta = nlohmann::json::object();
  if (meta_len > 0) {
    meta = nlohmann::json::parse(bytes.begin() + offset, bytes.end(), nullptr,
                                 /*allow_exceptions=*/false);
    if (meta.is_discarded() || !meta.is_object()) {
      throw FormatError("MIAG metadata is not a JSON object");
    }
  }
  auto ids = IdsFromMeta(meta, samples);
  return MiaGrid(models, samples, std::move(scores), std::move(mask),
                 std::move(ids), std::move(meta));
}

MiaGrid LoadGridCsv(const std::filesystem::path& scores_csv,
                    const std::filesystem::path& mask_csv) {
  const CsvTable scores = ReadCsv(scores_csv);
  const CsvTable mask = ReadCsv(mask_csv);
  if (scores.rows.empty()) throw FormatError("scores.csv has no data rows");
  const std::size_t models = scores.rows.size();
  const std::size_t samples = scores.rows.front().size();
  if (!scores.header.empty() && scores.header.size() != samples) {
    throw FormatError("header has " + std::to_string(scores.header.size()) +
                      " ids but rows have " + std::to_string(samples) +
                      " columns");
  }
  if (mask.rows.size() != models) {
    throw FormatError("shape mismatch between scores and mask: " +
                      std::to_string(models) + " vs " +
                      std::to_string(mask.rows.size()) + " rows");
  }
  std::vector<double> values;
  std::vector<std::uint8_t> bits;
  values.reserve(models * samples);
  bits.reserve(models * samples);
  for (std::size_t m = 0; m < models; ++m) {
    if (scores.rows[m].size() != samples) {
      throw FormatError("ragged scores.csv at row " + std::to_string(m));
    }
    if (mask.rows[m].size() != samples) {
      throw FormatError("shape mismatch between scores and mask at row " +
                        std::to_string(m));
    }
    for (std::size_t x = 0; x < samples; ++x) {
      double v = 0.0;
      if (!ParseDouble(scores.rows[m][x], v)) {
        throw FormatError("unparseable score '" + scores.rows[m][x] +
                          "' at " + Cell(m, x));
      }
      if (!std::isfinite(v)) {
        throw FormatError("non-finite score at " + Cell(m, x));
      }
      values.push_back(v);
      const std::string& b = mask.rows[m][x];
      if (b != "0" && b != "1") {
        throw FormatError("mask value outside {0,1} at " + Cell(m, x));
      }
      bits.push_back(b == "1" ? 1 : 0);
    }
  }
  return MiaGrid(models, samples, std::move(values), std::move(bits),
                 scores.header);
}

void SaveGridCsv(const MiaGrid& grid, const std::filesystem::path& scores_csv,
                 const std::filesystem::path& mask_csv) {
  for (const auto& id : grid.sample_ids()) {
    if (id.find_first_of(",\r\n") != std::string::npos) {
      throw InvalidArgument("sample id '" + id + "' cannot be stored in CSV");
    }
  }
  std::ofstream scores(scores_csv, std::ios::trunc);
  if (!scores) throw IoError("cannot open " + scores_csv.string());
  std::ofstream mask(mask_csv, std::ios::trunc);
  if (!mask) throw IoError("cannot open " + mask_csv.string());
  if (grid.has_sample_ids()) {
    for (std::size_t x = 0; x < grid.samples(); ++x) {
      scores << (x ? "," : "") << grid.sample_ids()[x];
    }
    scores << '\n';
  }
  char buf[32];
  for (std::size_t m = 0; m < grid.models(); ++m) {
    for (std::size_t x = 0; x < grid.samples(); ++x) {
      std::snprintf(buf, sizeof(buf), "%.17g", grid.score(m, x));
      scores << (x ? "," : "") << buf;
      mask << (x ? "," : "") << (grid.member(m, x) ? '1' : '0');
    }
    scores << '\n';
    mask << '\n';
  }
  scores.flush();
  mask.flush();
  if (!scores || !mask) throw IoError("write failure on CSV grid");
}

MiaGrid LoadGrid(const std::filesystem::path& path, GridFormat format) {
  if (format == GridFormat::kCsv) {
    return LoadGridCsv(path / "scores.csv", path / "mask.csv");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on " + path.string());
  return DecodeBinary(bytes);
}

MiaGrid LoadGridAuto(const std::filesystem::path& path) {
  return LoadGrid(path, std::filesystem::is_directory(path)
                            ? GridFormat::kCsv
                            : GridFormat::kBinary);
}

void SaveGrid(const MiaGrid& grid, const std::filesystem::path& path,
              GridFormat format) {
  if (format == GridFormat::kCsv) {
    std::error_code ec;
    std::filesystem::create_directories(path, ec);
    if (ec) throw IoError("cannot create " + path.string() + ": " + ec.message());
    SaveGridCsv(grid, path / "scores.csv", path / "mask.csv");
    return;
  }
  WriteFile(path, EncodeBinary(grid));
}

std::vector<std::size_t> SelectModels(std::size_t total, std::size_t m_prime,
                                      const ModelSelection& selection) {
  if (m_prime < 1 || m_prime > total) {
    throw InvalidArgument("m_prime=" + std::to_string(m_prime) +
                          " outside [1, " + std::to_string(total) + "]");
  }
  std::vector<std::size_t> rows(total);
  for (std::size_t i = 0; i < total; ++i) rows[i] = i;
  if (selection.kind == ModelSelection::Kind::kSeededRandom) {
    Rng rng(selection.seed);
    PartialShuffle(rows, m_prime, rng);
  }
  rows.resize(m_prime);
  std::sort(rows.begin(), rows.end());
  return rows;
}

MiaGrid SelectRows(const MiaGrid& grid, std::span<const std::size_t> rows) {
  const std::size_t n = grid.samples();
  std::vector<double> scores;
  std::vector<std::uint8_t> mask;
  scores.reserve(rows.size() * n);
  mask.reserve(rows.size() * n);
  for (std::size_t m : rows) {
    if (m >= grid.models()) throw InvalidArgument("row index out of range");
    const auto s = grid.row_scores(m);
    const auto b = grid.row_mask(m);
    scores.insert(scores.end(), s.begin(), s.end());
    mask.insert(mask.end(), b.begin(), b.end());
  }
  return MiaGrid(rows.size(), n, std::move(scores), std::move(mask),
                 grid.sample_ids(), grid.meta());
}

MiaGrid SubsetModels(const MiaGrid& grid, std::size_t m_prime,
                     const ModelSelection& selection) {
  const auto rows = SelectModels(grid.models(), m_prime, selection);
  return SelectRows(grid, rows);
}

}  // namespace mia
