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

#include "tsex/clue_encoders.h"

#include <cmath>
#include <variant>

#include "tsex/errors.h"

namespace tsex {

EmbeddingMatrix::EmbeddingMatrix(int dim, Vocabulary vocabulary, Rng& rng)
    : matrix_(GaussianMatrix(dim, vocabulary.size(), 1.0 / std::sqrt(dim), rng)),
      vocabulary_(std::move(vocabulary)) {}

void EmbeddingMatrix::CheckLabels(const LabelSet& labels) const {
  for (int id : labels.ids) {
    Require(id >= 0 && id < size(), ErrorCategory::kVocabulary,
            "class id " + std::to_string(id) + " outside embedding matrix of " +
                std::to_string(size()) + " classes");
  }
}

Vec EmbeddingMatrix::Embed(const LabelSet& labels) const {
  CheckLabels(labels);
  Vec e = Vec::Zero(matrix_.value.rows());
  for (int id : labels.ids) e += matrix_.value.col(id);
  return e;
}

void EmbeddingMatrix::Backward(const LabelSet& labels, const Vec& dembedding) {
  CheckLabels(labels);
  for (int id : labels.ids) matrix_.grad.col(id) += dembedding;
}

int EmbeddingMatrix::Extend(const Vec& embedding, const std::string& name) {
  Require(embedding.size() == matrix_.value.rows(), ErrorCategory::kShape,
          "new embedding has dimension " + std::to_string(embedding.size()));
  const int id = vocabulary_.Add(name);
  const Eigen::Index n = matrix_.value.cols();
  matrix_.value.conservativeResize(Eigen::NoChange, n + 1);
  matrix_.value.col(n) = embedding;
  matrix_.grad.conservativeResize(Eigen::NoChange, n + 1);
  matrix_.grad.col(n).setZero();
  return id;
}

void EmbeddingMatrix::CollectParams(const std::string& prefix, ParamList* out) {
  out->push_back({prefix + ".matrix", &matrix_});
}

// ------------------------------------------------------ EnrollmentEncoder

EnrollmentEncoder::EnrollmentEncoder(const CodecConfig& codec,
                                     const ExtractorConfig& config, int blocks,
                                     Rng& rng)
    : encoder_(codec, rng) {
  TcnConfig tcn;
  tcn.channels = config.bottleneck;
  tcn.hidden = config.hidden;
  tcn.kernel_size = config.kernel_size;
  tcn.blocks = blocks;
  tcn.repeats = 1;
  summary_ = MixtureNet(codec.feature_dim, tcn, rng);
}

Vec MeanPool(const Mat& frames) {
  Require(frames.cols() > 0, ErrorCategory::kLength, "no frames to pool");
  return frames.rowwise().mean();
}

Vec EnrollmentEncoder::Forward(const Vec& audio, Cache* cache) const {
  Cache local;
  Cache& c = cache != nullptr ? *cache : local;
  c.length = static_cast<std::size_t>(audio.size());
  const Mat features = encoder_.Forward(audio, &c.encoder);
  const Mat frames = summary_.Forward(features, cache ? &c.net : nullptr);
  c.frames = frames.cols();
  return MeanPool(frames);
}

void EnrollmentEncoder::Backward(const Cache& cache, const Vec& dembedding) {
  // Mean pooling spreads the gradient evenly over frames.
  const Mat dframes =
      (dembedding / static_cast<double>(cache.frames)).replicate(1, cache.frames);
  const Mat dfeatures = summary_.Backward(cache.net, dframes);
  encoder_.Backward(cache.encoder, dfeatures, cache.length);
}

Mat EnrollmentEncoder::SummaryFrames(const Vec& audio) const {
  return summary_.Forward(encoder_.Forward(audio, nullptr), nullptr);
}

void EnrollmentEncoder::CollectParams(const std::string& prefix,
                                      ParamList* out) {
  encoder_.CollectParams(prefix + ".encoder", out);
  summary_.CollectParams(prefix + ".summary", out);
}

void EnrollmentEncoder::set_frozen(bool frozen) {
  encoder_.set_frozen(frozen);
  summary_.set_frozen(frozen);
}

Vec MultiEnrollEmbedding(const std::vector<Waveform>& audios,
                         const EnrollmentEncoder& encoder) {
  Require(!audios.empty(), ErrorCategory::kPrecondition,
          "need at least one enrollment");
  Vec sum = encoder.Forward(audios.front().samples(), nullptr);
  for (std::size_t i = 1; i < audios.size(); ++i) {
    sum += encoder.Forward(audios[i].samples(), nullptr);
  }
  return sum;
}

Vec ClueEmbedding(const Clue& clue, const EmbeddingMatrix& matrix,
                  const EnrollmentEncoder& encoder) {
  if (const auto* labels = std::get_if<LabelSet>(&clue)) {
    return matrix.Embed(*labels);
  }
  return MultiEnrollEmbedding(std::get<EnrollmentSet>(clue).audios, encoder);
}

}  // namespace tsex
