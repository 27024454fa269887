// Copyright 2026 The Tsex Authors. All Rights Reserved.
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

#include "tsex/checkpoint.h"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "tsex/errors.h"

namespace tsex {
namespace {

constexpr char kMagic[8] = {'T', 'S', 'E', 'X', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

}  // namespace

void Checkpoint::Save(const std::filesystem::path& path) const {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  nlohmann::json full = header;
  nlohmann::json index = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, array] : arrays) {
    index.push_back({{"name", name},
                     {"rows", array.rows()},
                     {"cols", array.cols()},
                     {"offset", offset}});
    offset += static_cast<std::uint64_t>(array.size());
  }
  full["arrays"] = index;
  const std::string text = full.dump();

  // Write to a sibling file and rename so a crash never leaves a torn file.
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    Require(out.good(), ErrorCategory::kIo, "cannot write " + tmp.string());
    out.write(kMagic, sizeof(kMagic));
    out.write(reinterpret_cast<const char*>(&kVersion), sizeof(kVersion));
    const std::uint64_t length = text.size();
    out.write(reinterpret_cast<const char*>(&length), sizeof(length));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& [name, array] : arrays) {
      out.write(reinterpret_cast<const char*>(array.data()),
                static_cast<std::streamsize>(array.size() * sizeof(double)));
    }
    Require(out.good(), ErrorCategory::kIo, "write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint Checkpoint::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), ErrorCategory::kIo, "cannot open checkpoint " + path.string());
  char magic[8];
  std::uint32_t version = 0;
  std::uint64_t length = 0;
  in.read(magic, sizeof(magic));
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  in.read(reinterpret_cast<char*>(&length), sizeof(length));
  Require(in.good() && std::memcmp(magic, kMagic, sizeof(kMagic)) == 0,
          ErrorCategory::kParse, path.string() + " is not a checkpoint");
  Require(version == kVersion, ErrorCategory::kParse,
          "unsupported checkpoint version " + std::to_string(version));
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  Require(in.good(), ErrorCategory::kParse, "truncated checkpoint header");

  Checkpoint checkpoint;
  try {
    checkpoint.header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCategory::kParse, std::string("checkpoint header: ") + e.what());
  }
  const nlohmann::json index = checkpoint.header.at("arrays");
  checkpoint.header.erase("arrays");
  for (const auto& entry : index) {
    const auto rows = entry.at("rows").get<Eigen::Index>();
    const auto cols = entry.at("cols").get<Eigen::Index>();
    Mat array(rows, cols);
    in.read(reinterpret_cast<char*>(array.data()),
            static_cast<std::streamsize>(array.size() * sizeof(double)));
    Require(in.good(), ErrorCategory::kParse, "truncated checkpoint arrays");
    checkpoint.arrays.emplace(entry.at("name").get<std::string>(),
                              std::move(array));
  }
  return checkpoint;
}

void StoreParams(const ParamList& params, Checkpoint* checkpoint) {
  for (const auto& p : params) checkpoint->arrays[p.name] = p.param->value;
}

void RestoreParams(const Checkpoint& checkpoint, const ParamList& params) {
  for (const auto& p : params) {
    auto it = checkpoint.arrays.find(p.name);
    Require(it != checkpoint.arrays.end(), ErrorCategory::kParse,
            "checkpoint lacks parameter " + p.name);
    Require(it->second.rows() == p.param->value.rows() &&
                it->second.cols() == p.param->value.cols(),
            ErrorCategory::kShape, "shape mismatch for parameter " + p.name);
    p.param->value = it->second;
    p.param->grad = Mat::Zero(p.param->value.rows(), p.param->value.cols());
  }
}

}  // namespace tsex
