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

#ifndef TSEX_RNG_H_
#define TSEX_RNG_H_

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace tsex {

// Deterministic random stream. The engine is the standard 64-bit Mersenne
// twister, whose output sequence is fixed by the C++ standard; the
// distributions are computed here because the standard library's are
// implementation-defined. Streams are single-owner: fork one per worker.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t NextU64() { return engine_(); }

  // Uniform in [0, 1).
  double Uniform();
  // Uniform in [lo, hi].
  double Uniform(double lo, double hi);
  // Uniform integer in [lo, hi].
  int UniformInt(int lo, int hi);
  double Normal();
  bool Bernoulli(double p);

  // Independent child stream keyed by `stream_id`.
  Rng Fork(std::uint64_t stream_id) const;

  std::uint64_t seed() const { return seed_; }

  template <typename T>
  void Shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(
          UniformInt(0, static_cast<int>(i) - 1));
      std::swap(items[i - 1], items[j]);
    }
  }

  // `count` distinct values drawn from [0, population).
  std::vector<int> SampleWithoutReplacement(int population, int count);

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

std::uint64_t SplitMix64(std::uint64_t x);

}  // namespace tsex

#endif  // TSEX_RNG_H_
