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

#ifndef TSEX_CLUE_ENCODERS_H_
#define TSEX_CLUE_ENCODERS_H_

#include <string>
#include <vector>

#include "tsex/codec.h"
#include "tsex/extraction.h"
#include "tsex/nn.h"
#include "tsex/types.h"
#include "tsex/vocabulary.h"

namespace tsex {

// D x N table whose column n is the embedding of class n.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  // Columns drawn from N(0, 1/D).
  EmbeddingMatrix(int dim, Vocabulary vocabulary, Rng& rng);

  // Sum of the columns named by `labels`; zero vector for an empty set.
  Vec Embed(const LabelSet& labels) const;
  void Backward(const LabelSet& labels, const Vec& dembedding);

  // Appends `embedding` as the column of a new class; returns its id.
  int Extend(const Vec& embedding, const std::string& name);

  void CollectParams(const std::string& prefix, ParamList* out);

  int dim() const { return static_cast<int>(matrix_.value.rows()); }
  int size() const { return static_cast<int>(matrix_.value.cols()); }
  const Vocabulary& vocabulary() const { return vocabulary_; }
  const Mat& columns() const { return matrix_.value; }
  Param& param() { return matrix_; }

 private:
  void CheckLabels(const LabelSet& labels) const;

  Param matrix_;
  Vocabulary vocabulary_;
};

// Sequence-summary enrollment encoder: a private encoder layer, a TCN
// summary stack, then mean pooling over frames.
class EnrollmentEncoder {
 public:
  struct Cache {
    std::size_t length = 0;
    Encoder::Cache encoder;
    MixtureNet::Cache net;
    Eigen::Index frames = 0;
  };

  EnrollmentEncoder() = default;
  EnrollmentEncoder(const CodecConfig& codec, const ExtractorConfig& config,
                    int blocks, Rng& rng);

  Vec Forward(const Vec& audio, Cache* cache) const;
  void Backward(const Cache& cache, const Vec& dembedding);

  // Summary-stack output frames before pooling.
  Mat SummaryFrames(const Vec& audio) const;

  void CollectParams(const std::string& prefix, ParamList* out);
  void set_frozen(bool frozen);

 private:
  Encoder encoder_;
  MixtureNet summary_;
};

Vec MeanPool(const Mat& frames);

Vec MultiEnrollEmbedding(const std::vector<Waveform>& audios,
                         const EnrollmentEncoder& encoder);

// Dispatches on the clue variant: label sets use the embedding matrix,
// enrollment sets sum the per-enrollment embeddings.
Vec ClueEmbedding(const Clue& clue, const EmbeddingMatrix& matrix,
                  const EnrollmentEncoder& encoder);

}  // namespace tsex

#endif  // TSEX_CLUE_ENCODERS_H_
