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

#include "tsex/model.h"

#include <variant>

#include "tsex/checkpoint.h"
#include "tsex/errors.h"

namespace tsex {

ModelConfig ModelConfig::Toy() {
  ModelConfig c;
  c.codec = CodecConfig{64, 16, 8};
  c.extractor = ExtractorConfig::Toy();
  return c;
}

ModelConfig ModelConfig::Full() {
  ModelConfig c;
  c.extractor = ExtractorConfig::Full();
  c.codec = CodecConfig{c.extractor.feature_dim, 16, 8};
  return c;
}

void ModelConfig::Validate() const {
  extractor.Validate();
  Require(codec.feature_dim == extractor.feature_dim, ErrorCategory::kConfig,
          "codec feature_dim must equal extractor feature_dim");
  Require(codec.frame_length > 0 && codec.hop > 0 &&
              codec.hop <= codec.frame_length,
          ErrorCategory::kConfig, "need 0 < hop <= frame_length");
  Require(enrollment_blocks >= 1, ErrorCategory::kConfig,
          "enrollment_blocks must be positive");
}

nlohmann::json ModelConfig::ToJson() const {
  return {{"feature_dim", codec.feature_dim},
          {"frame_length", codec.frame_length},
          {"hop", codec.hop},
          {"bottleneck", extractor.bottleneck},
          {"hidden", extractor.hidden},
          {"kernel_size", extractor.kernel_size},
          {"blocks", extractor.blocks},
          {"mix_repeats", extractor.mix_repeats},
          {"tgt_repeats", extractor.tgt_repeats},
          {"enrollment_blocks", enrollment_blocks}};
}

ModelConfig ModelConfig::FromJson(const nlohmann::json& json) {
  ModelConfig c;
  try {
    c.codec.feature_dim = json.at("feature_dim");
    c.codec.frame_length = json.at("frame_length");
    c.codec.hop = json.at("hop");
    c.extractor.feature_dim = c.codec.feature_dim;
    c.extractor.bottleneck = json.at("bottleneck");
    c.extractor.hidden = json.at("hidden");
    c.extractor.kernel_size = json.at("kernel_size");
    c.extractor.blocks = json.at("blocks");
    c.extractor.mix_repeats = json.at("mix_repeats");
    c.extractor.tgt_repeats = json.at("tgt_repeats");
    c.enrollment_blocks = json.at("enrollment_blocks");
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCategory::kParse, std::string("model config: ") + e.what());
  }
  c.Validate();
  return c;
}

TseModel::TseModel(const ModelConfig& config, Vocabulary vocabulary,
                   std::uint64_t seed)
    : config_(config) {
  config_.Validate();
  // Separate streams keep each component's init independent of the others'
  // sizes.
  Rng root(seed);
  Rng ext_rng = root.Fork(1);
  Rng emb_rng = root.Fork(2);
  Rng enr_rng = root.Fork(3);
  extractor_ = Extractor(config_.codec, config_.extractor, ext_rng);
  embeddings_ = EmbeddingMatrix(config_.codec.feature_dim,
                                std::move(vocabulary), emb_rng);
  enrollment_ = EnrollmentEncoder(config_.codec, config_.extractor,
                                  config_.enrollment_blocks, enr_rng);
}

Vec TseModel::Embed(const Clue& clue, ClueCache* cache) const {
  if (const auto* labels = std::get_if<LabelSet>(&clue)) {
    if (cache != nullptr) {
      cache->from_labels = true;
      cache->labels = *labels;
    }
    return embeddings_.Embed(*labels);
  }
  const auto& audios = std::get<EnrollmentSet>(clue).audios;
  Require(!audios.empty(), ErrorCategory::kPrecondition,
          "enrollment clue has no audio");
  if (cache == nullptr) return MultiEnrollEmbedding(audios, enrollment_);
  cache->from_labels = false;
  cache->enrollments.assign(audios.size(), {});
  Vec sum = Vec::Zero(config_.codec.feature_dim);
  for (std::size_t i = 0; i < audios.size(); ++i) {
    sum += enrollment_.Forward(audios[i].samples(), &cache->enrollments[i]);
  }
  return sum;
}

void TseModel::EmbedBackward(const ClueCache& cache, const Vec& dembedding) {
  if (cache.from_labels) {
    embeddings_.Backward(cache.labels, dembedding);
    return;
  }
  for (const auto& c : cache.enrollments) enrollment_.Backward(c, dembedding);
}

Vec TseModel::Forward(const Vec& mixture, const Clue& clue, Pass* pass) const {
  if (pass == nullptr) {
    return extractor_.Forward(mixture, Embed(clue, nullptr), nullptr);
  }
  const Vec e = Embed(clue, &pass->clue);
  return extractor_.Forward(mixture, e, &pass->extractor);
}

void TseModel::Backward(const Pass& pass, const Vec& doutput) {
  const Vec de = extractor_.Backward(pass.extractor, doutput);
  EmbedBackward(pass.clue, de);
}

Waveform TseModel::Extract(const Waveform& mixture, const Clue& clue) const {
  ValidateClue(clue, vocabulary().size(), config_.codec.frame_length);
  return Waveform(Forward(mixture.samples(), clue, nullptr),
                  mixture.sample_rate());
}

Waveform TseModel::ExtractWithEmbedding(const Waveform& mixture,
                                        const Vec& embedding) const {
  return Waveform(extractor_.Forward(mixture.samples(), embedding, nullptr),
                  mixture.sample_rate());
}

ParamList TseModel::Params() {
  ParamList out;
  extractor_.CollectParams(&out);
  embeddings_.CollectParams("class_embedding", &out);
  enrollment_.CollectParams("enrollment", &out);
  return out;
}

void TseModel::SetAllFrozen(bool frozen) {
  extractor_.SetAllFrozen(frozen);
  enrollment_.set_frozen(frozen);
}

void TseModel::Save(const std::filesystem::path& path) const {
  Checkpoint ckpt;
  ckpt.header["kind"] = "tse_model";
  ckpt.header["config"] = config_.ToJson();
  ckpt.header["vocabulary"] = vocabulary().names();
  ckpt.header["metadata"] = metadata;
  // Params() only hands out pointers; nothing is modified.
  StoreParams(const_cast<TseModel*>(this)->Params(), &ckpt);
  ckpt.Save(path);
}

TseModel TseModel::Load(const std::filesystem::path& path) {
  const Checkpoint ckpt = Checkpoint::Load(path);
  Require(ckpt.header.value("kind", "") == "tse_model", ErrorCategory::kParse,
          path.string() + " does not hold an extraction model");
  const ModelConfig config = ModelConfig::FromJson(ckpt.header.at("config"));
  Vocabulary vocabulary(
      ckpt.header.at("vocabulary").get<std::vector<std::string>>());
  TseModel model(config, std::move(vocabulary), 0);
  RestoreParams(ckpt, model.Params());
  model.metadata = ckpt.header.value("metadata", nlohmann::json::object());
  return model;
}

}  // namespace tsex
