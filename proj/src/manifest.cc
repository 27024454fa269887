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

#include "tsex/manifest.h"

#include <fstream>
#include <string>

#include "json.hpp"
#include "tsex/errors.h"
#include "tsex/wav_io.h"

namespace tsex {
namespace {

using nlohmann::json;

void CheckClassId(int id, int num_classes, int line_number) {
  if (num_classes < 0) return;
  Require(id >= 0 && id < num_classes, ErrorCategory::kVocabulary,
          "line " + std::to_string(line_number) + ": class id " +
              std::to_string(id) + " outside vocabulary of size " +
              std::to_string(num_classes));
}

void ValidateRecord(const Manifest& manifest, const ManifestRecord& record,
                    const ManifestOptions& options, int line_number) {
  for (int id : record.active_classes) {
    CheckClassId(id, options.num_classes, line_number);
  }
  for (int id : record.target.labels) {
    CheckClassId(id, options.num_classes, line_number);
  }
  for (const auto& [id, path] : record.stem_paths) {
    CheckClassId(id, options.num_classes, line_number);
  }
  if (!options.check_paths) return;
  auto check = [&](const std::string& path) {
    if (path.empty()) return;
    Require(std::filesystem::exists(manifest.Resolve(path)), ErrorCategory::kIo,
            "line " + std::to_string(line_number) + ": missing file " + path);
  };
  check(record.mixture_path);
  check(record.noise_path);
  for (const auto& [id, path] : record.stem_paths) check(path);
  for (const auto& path : record.enrollment_paths) check(path);
}

}  // namespace

std::filesystem::path Manifest::Resolve(const std::string& path) const {
  std::filesystem::path p(path);
  return p.is_absolute() ? p : base_dir / p;
}

ManifestRecord ParseManifestLine(const std::string& line, int line_number) {
  const std::string where = "line " + std::to_string(line_number) + ": ";
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    Fail(ErrorCategory::kParse, where + e.what());
  }
  Require(j.is_object(), ErrorCategory::kParse, where + "record is not an object");
  ManifestRecord record;
  try {
    record.mixture_path = j.at("mixture_path").get<std::string>();
    record.id = j.value("id", std::string());
    record.split = j.value("split", std::string());
    record.noise_path = j.value("noise_path", std::string());
    if (j.contains("stem_paths")) {
      for (const auto& [key, value] : j.at("stem_paths").items()) {
        std::size_t consumed = 0;
        const int id = std::stoi(key, &consumed);
        Require(consumed == key.size(), ErrorCategory::kParse,
                where + "stem key '" + key + "' is not a class id");
        record.stem_paths[id] = value.get<std::string>();
      }
    }
    record.active_classes =
        j.value("active_classes", std::vector<int>());
    const json& target = j.at("target_spec");
    record.target.labels = target.at("labels").get<std::vector<int>>();
    record.target.inactive = target.value("inactive", false);
    record.enrollment_paths =
        j.value("enrollment_paths", std::vector<std::string>());
    record.snr_db = j.value("snr_db", 0.0);
  } catch (const json::exception& e) {
    Fail(ErrorCategory::kParse, where + e.what());
  } catch (const std::invalid_argument&) {
    Fail(ErrorCategory::kParse, where + "non-numeric stem key");
  }
  return record;
}

std::string SerializeManifestRecord(const ManifestRecord& record) {
  json stems = json::object();
  for (const auto& [id, path] : record.stem_paths) {
    stems[std::to_string(id)] = path;
  }
  json j = {
      {"id", record.id},
      {"split", record.split},
      {"mixture_path", record.mixture_path},
      {"noise_path", record.noise_path},
      {"stem_paths", stems},
      {"active_classes", record.active_classes},
      {"target_spec",
       {{"labels", record.target.labels}, {"inactive", record.target.inactive}}},
      {"enrollment_paths", record.enrollment_paths},
      {"snr_db", record.snr_db},
  };
  return j.dump();
}

Manifest LoadManifest(const std::filesystem::path& path,
                      const ManifestOptions& options) {
  std::ifstream in(path);
  Require(in.good(), ErrorCategory::kIo, "cannot open manifest " + path.string());
  Manifest manifest;
  manifest.base_dir = path.parent_path();
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ManifestRecord record = ParseManifestLine(line, line_number);
    ValidateRecord(manifest, record, options, line_number);
    manifest.records.push_back(std::move(record));
  }
  return manifest;
}

void WriteManifest(const Manifest& manifest, const std::filesystem::path& path) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::trunc);
  Require(out.good(), ErrorCategory::kIo, "cannot write " + path.string());
  for (const auto& record : manifest.records) {
    out << SerializeManifestRecord(record) << '\n';
  }
}

MixtureExample LoadExample(const Manifest& manifest,
                           const ManifestRecord& record) {
  MixtureExample example;
  example.mixture = ReadWav(manifest.Resolve(record.mixture_path));
  for (const auto& [id, path] : record.stem_paths) {
    Waveform stem = ReadWav(manifest.Resolve(path));
    RequireCompatible(stem, example.mixture);
    example.stems.emplace(id, std::move(stem));
  }
  example.noise = record.noise_path.empty()
                      ? Waveform::Zeros(example.mixture.size())
                      : ReadWav(manifest.Resolve(record.noise_path));
  example.active_classes.insert(record.active_classes.begin(),
                                record.active_classes.end());
  example.target = record.target;
  example.duration_s = example.mixture.duration_s();
  example.snr_db = record.snr_db;
  return example;
}

}  // namespace tsex
