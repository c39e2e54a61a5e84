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

#include "manifest.h"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <memory>

#include "mia_audit/error.h"
#include "mia_audit/version.h"

namespace mia::tools {
namespace fs = std::filesystem;
namespace {

using DigestCtx = std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)>;

void HashFile(EVP_MD_CTX* ctx, const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::array<char, 1 << 16> buf;
  while (in) {
    in.read(buf.data(), buf.size());
    EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
}

}  // namespace

std::string Sha256Path(const fs::path& path) {
  DigestCtx ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr);
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(path)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      const std::string rel = fs::relative(f, path).generic_string();
      EVP_DigestUpdate(ctx.get(), rel.data(), rel.size() + 1);
      HashFile(ctx.get(), f);
    }
  } else {
    HashFile(ctx.get(), path);
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md, &len);
  std::string hex;
  char byte[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof(byte), "%02x", md[i]);
    hex += byte;
  }
  return hex;
}

void WriteText(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.close();
  if (!out) throw IoError("cannot write " + path.string());
}

RunManifest::RunManifest(std::string command, fs::path out_dir)
    : command_(std::move(command)),
      out_dir_(std::move(out_dir)),
      start_(std::chrono::steady_clock::now()) {
  fs::create_directories(out_dir_);
}

void RunManifest::AddInput(const fs::path& path) {
  inputs_.push_back({{"path", path.string()}, {"sha256", Sha256Path(path)}});
}

void RunManifest::WriteOutput(const std::string& name,
                              const std::string& contents) {
  WriteText(out_dir_ / name, contents);
  AddOutput(name);
}

void RunManifest::Finish() const {
  const std::chrono::duration<double> elapsed =
      std::chrono::steady_clock::now() - start_;
  nlohmann::json outputs = nlohmann::json::array();
  for (const auto& o : outputs_) {
    outputs.push_back({{"path", o}, {"sha256", Sha256Path(out_dir_ / o)}});
  }
  const nlohmann::json manifest = {
      {"command", command_},
      {"config", config_},
      {"inputs", inputs_},
      {"version", kVersion},
      {"duration_seconds", elapsed.count()},
      {"outputs", outputs},
  };
  WriteText(out_dir_ / "manifest.json", manifest.dump(2) + "\n");
}

}  // namespace mia::tools
