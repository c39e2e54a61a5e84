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

#ifndef MIA_AUDIT_TOOLS_MANIFEST_H_
#define MIA_AUDIT_TOOLS_MANIFEST_H_

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

namespace mia::tools {

// Hex SHA-256 of a file, or of every regular file below a directory in
// sorted path order.
std::string Sha256Path(const std::filesystem::path& path);

// Writes `contents` to `path`, creating parent directories.
void WriteText(const std::filesystem::path& path, const std::string& contents);

// Collects what a run read and wrote, then lands as out_dir/manifest.json.
class RunManifest {
 public:
  RunManifest(std::string command, std::filesystem::path out_dir);

  void SetConfig(nlohmann::json config) { config_ = std::move(config); }
  void AddInput(const std::filesystem::path& path);
  // `path` is relative to the output directory.
  void AddOutput(const std::string& path) { outputs_.push_back(path); }
  void WriteOutput(const std::string& name, const std::string& contents);

  const std::filesystem::path& out_dir() const { return out_dir_; }

  void Finish() const;

 private:
  std::string command_;
  std::filesystem::path out_dir_;
  nlohmann::json config_ = nlohmann::json::object();
  nlohmann::json inputs_ = nlohmann::json::array();
  std::vector<std::string> outputs_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace mia::tools

#endif  // MIA_AUDIT_TOOLS_MANIFEST_H_
