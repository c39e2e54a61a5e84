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

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "mia_audit/error.h"

namespace mia {
namespace {

namespace fs = std::filesystem;

MiaGrid RandomGrid(std::size_t m, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> score(0.0, 3.0);
  std::bernoulli_distribution in(0.5);
  std::vector<double> s(m * n);
  std::vector<std::uint8_t> k(m * n);
  for (std::size_t i = 0; i < s.size(); ++i) {
    s[i] = score(gen);
    k[i] = in(gen);
  }
  return MiaGrid(m, n, s, k);
}

fs::path TempDir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("mia_grid_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

TEST(MiaGridTest, Accessors) {
  MiaGrid g(2, 3, {1, 2, 3, 4, 5, 6}, {1, 0, 0, 0, 1, 1}, {"a", "b", "c"},
            {{"note", "x"}});
  EXPECT_EQ(g.score(1, 0), 4.0);
  EXPECT_TRUE(g.member(0, 0));
  EXPECT_FALSE(g.member(1, 0));
  EXPECT_EQ(g.sample_id(2), "c");
  EXPECT_EQ(g.members_in_column(2), 1u);
  EXPECT_EQ(g.row_scores(1)[2], 6.0);
  EXPECT_EQ(g.meta()["note"], "x");
  MiaGrid unnamed(1, 2, {0, 0}, {0, 1});
  EXPECT_EQ(unnamed.sample_id(1), "1");
}

TEST(MiaGridTest, RejectsInvalidContents) {
  EXPECT_THROW(MiaGrid(2, 2, {1, 2, 3}, {0, 0, 0, 0}), FormatError);
  EXPECT_THROW(MiaGrid(2, 2, {1, 2, 3, 4}, {0, 0, 0}), FormatError);
  EXPECT_THROW(MiaGrid(1, 2, {1, std::numeric_limits<double>::infinity()},
                       {0, 1}),
               FormatError);
  EXPECT_THROW(MiaGrid(1, 2, {1, std::nan("")}, {0, 1}), FormatError);
  EXPECT_THROW(MiaGrid(1, 2, {1, 2}, {0, 2}), FormatError);
  EXPECT_THROW(MiaGrid(0, 0, {}, {}), InvalidArgument);
  EXPECT_THROW(MiaGrid(1, 2, {1, 2}, {0, 1}, {"only-one"}), InvalidArgument);
}

TEST(MiaGridTest, BinaryRoundTripIsExact) {
  const MiaGrid g = RandomGrid(7, 5, 1);
  const auto bytes = EncodeBinary(g);
  ASSERT_EQ(std::memcmp(bytes.data(), "MIAG", 4), 0);
  // magic, version, M, N, scores, mask, metadata length, metadata.
  EXPECT_GE(bytes.size(), 4 + 4 + 8 + 8 + 35 * 8 + 35 + 4u);
  const MiaGrid back = DecodeBinary(bytes);
  EXPECT_TRUE(back == g);
  EXPECT_EQ(EncodeBinary(back), bytes);
}

TEST(MiaGridTest, BinaryKeepsIdsAndMetadata) {
  MiaGrid g(1, 2, {0.1, 0.2}, {1, 0}, {"x,1", "y"}, {{"seed", 9}});
  const MiaGrid back = DecodeBinary(EncodeBinary(g));
  EXPECT_EQ(back.sample_id(0), "x,1");
  EXPECT_EQ(back.meta()["seed"], 9);
}

TEST(MiaGridTest, BinaryRejectsCorruption) {
  auto bytes = EncodeBinary(RandomGrid(2, 2, 2));
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(DecodeBinary(bad_magic), FormatError);
  auto truncated = bytes;
  truncated.resize(truncated.size() - 3);
  EXPECT_THROW(DecodeBinary(truncated), FormatError);
  auto bad_version = bytes;
  bad_version[4] = 9;
  EXPECT_THROW(DecodeBinary(bad_version), FormatError);
  auto bad_mask = bytes;
  bad_mask[4 + 4 + 16 + 4 * 8] = 7;
  EXPECT_THROW(DecodeBinary(bad_mask), FormatError);
}

TEST(MiaGridTest, FileRoundTripBothFormats) {
  const fs::path dir = TempDir("roundtrip");
  const MiaGrid g = RandomGrid(5, 4, 3);
  SaveGrid(g, dir / "g.miag", GridFormat::kBinary);
  SaveGrid(g, dir / "csv", GridFormat::kCsv);
  EXPECT_TRUE(LoadGrid(dir / "g.miag", GridFormat::kBinary) == g);
  EXPECT_TRUE(LoadGrid(dir / "csv", GridFormat::kCsv) == g);
  EXPECT_TRUE(LoadGridAuto(dir / "csv") == g);
  EXPECT_TRUE(LoadGridAuto(dir / "g.miag") == g);
}

TEST(MiaGridTest, CsvWithHeaderIds) {
  const fs::path dir = TempDir("csvids");
  std::ofstream(dir / "scores.csv") << "s0,s1\n1.5,-2\n0,3e-3\n";
  std::ofstream(dir / "mask.csv") << "1,0\n0,1\n";
  const MiaGrid g = LoadGridCsv(dir / "scores.csv", dir / "mask.csv");
  EXPECT_EQ(g.models(), 2u);
  EXPECT_EQ(g.sample_id(1), "s1");
  EXPECT_DOUBLE_EQ(g.score(1, 1), 3e-3);
}

TEST(MiaGridTest, CsvErrorsNameTheProblem) {
  const fs::path dir = TempDir("csvbad");
  std::ofstream(dir / "scores.csv") << "1,2\n3,4\n";
  std::ofstream(dir / "mask.csv") << "1,0\n";
  try {
    LoadGridCsv(dir / "scores.csv", dir / "mask.csv");
    FAIL() << "expected a shape error";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("shape mismatch"), std::string::npos);
  }
  std::ofstream(dir / "scores.csv", std::ios::trunc) << "1,nan\n";
  std::ofstream(dir / "mask.csv", std::ios::trunc) << "1,0\n";
  EXPECT_THROW(LoadGridCsv(dir / "scores.csv", dir / "mask.csv"), FormatError);
  EXPECT_THROW(LoadGridAuto(dir / "missing.miag"), IoError);
}

TEST(MiaGridTest, ParseFormat) {
  EXPECT_EQ(ParseGridFormat("csv"), GridFormat::kCsv);
  EXPECT_EQ(ParseGridFormat("binary"), GridFormat::kBinary);
  EXPECT_THROW(ParseGridFormat("parquet"), InvalidArgument);
}

TEST(ModelSelectionTest, FirstAndSeededRandom) {
  const auto first = SelectModels(10, 3, ModelSelection::First());
  EXPECT_EQ(first, (std::vector<std::size_t>{0, 1, 2}));
  const auto r1 = SelectModels(100, 10, ModelSelection::Random(4));
  const auto r2 = SelectModels(100, 10, ModelSelection::Random(4));
  EXPECT_EQ(r1, r2);
  EXPECT_TRUE(std::is_sorted(r1.begin(), r1.end()));
  EXPECT_EQ(std::adjacent_find(r1.begin(), r1.end()), r1.end());
  EXPECT_NE(r1, SelectModels(100, 10, ModelSelection::Random(5)));
  EXPECT_THROW(SelectModels(5, 6, ModelSelection::First()), InvalidArgument);
  EXPECT_THROW(SelectModels(5, 0, ModelSelection::First()), InvalidArgument);
}

TEST(ModelSelectionTest, SubsetKeepsRows) {
  const MiaGrid g = RandomGrid(6, 3, 5);
  const MiaGrid sub = SubsetModels(g, 2, ModelSelection::Random(1));
  const auto rows = SelectModels(6, 2, ModelSelection::Random(1));
  for (std::size_t r = 0; r < 2; ++r) {
    for (std::size_t x = 0; x < 3; ++x) {
      EXPECT_EQ(sub.score(r, x), g.score(rows[r], x));
      EXPECT_EQ(sub.member(r, x), g.member(rows[r], x));
    }
  }
}

}  // namespace
}  // namespace mia
