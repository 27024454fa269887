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

#ifndef TSEX_MODEL_H_
#define TSEX_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <vector>

#include "json.hpp"
#include "tsex/clue_encoders.h"
#include "tsex/codec.h"
#include "tsex/extraction.h"
#include "tsex/nn.h"
#include "tsex/vocabulary.h"

namespace tsex {

struct ModelConfig {
  CodecConfig codec;
  ExtractorConfig extractor;
  int enrollment_blocks = 4;

  static ModelConfig Toy();
  static ModelConfig Full();
  void Validate() const;
  nlohmann::json ToJson() const;
  static ModelConfig FromJson(const nlohmann::json& json);
};

// Everything needed to turn (mixture, clue) into an extracted waveform:
// codec, extraction network, class embedding matrix and enrollment encoder.
class TseModel {
 public:
  struct ClueCache {
    bool from_labels = true;
    LabelSet labels;
    std::vector<EnrollmentEncoder::Cache> enrollments;
  };
  struct Pass {
    ClueCache clue;
    Extractor::Cache extractor;
  };

  TseModel() = default;
  TseModel(const ModelConfig& config, Vocabulary vocabulary,
           std::uint64_t seed);

  Vec Embed(const Clue& clue, ClueCache* cache) const;
  void EmbedBackward(const ClueCache& cache, const Vec& dembedding);

  Vec Forward(const Vec& mixture, const Clue& clue, Pass* pass) const;
  void Backward(const Pass& pass, const Vec& doutput);

  Waveform Extract(const Waveform& mixture, const Clue& clue) const;
  Waveform ExtractWithEmbedding(const Waveform& mixture,
                                const Vec& embedding) const;

  // Parameter groups are distinguished by name prefix: "encoder.",
  // "ext_mix.", "ext_tgt.", "decoder.", "class_embedding.", "enrollment.".
  ParamList Params();
  void SetAllFrozen(bool frozen);

  void Save(const std::filesystem::path& path) const;
  static TseModel Load(const std::filesystem::path& path);

  Extractor& extractor() { return extractor_; }
  const Extractor& extractor() const { return extractor_; }
  EmbeddingMatrix& embeddings() { return embeddings_; }
  const EmbeddingMatrix& embeddings() const { return embeddings_; }
  EnrollmentEncoder& enrollment() { return enrollment_; }
  const EnrollmentEncoder& enrollment() const { return enrollment_; }
  const Vocabulary& vocabulary() const { return embeddings_.vocabulary(); }
  const ModelConfig& config() const { return config_; }

  // Free-form training record: epochs, validation loss, run config echo.
  nlohmann::json metadata = nlohmann::json::object();

 private:
  ModelConfig config_;
  Extractor extractor_;
  EmbeddingMatrix embeddings_;
  EnrollmentEncoder enrollment_;
};

}  // namespace tsex

#endif  // TSEX_MODEL_H_
