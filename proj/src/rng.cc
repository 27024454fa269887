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

#include "tsex/rng.h"

#include <cmath>
#include <numbers>
#include <numeric>

#include "tsex/errors.h"

namespace tsex {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

Rng::Rng(std::uint64_t seed) : seed_(seed), engine_(SplitMix64(seed)) {}

double Rng::Uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::Uniform(double lo, double hi) {
  if (hi <= lo) return lo;
  const double value = lo + (hi - lo) * Uniform();
  return value > hi ? hi : value;
}

int Rng::UniformInt(int lo, int hi) {
  Require(hi >= lo, ErrorCategory::kPrecondition, "empty integer range");
  const std::uint64_t span =
      static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) - lo) + 1;
  // Rejection sampling removes modulo bias.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t draw;
  do {
    draw = engine_();
  } while (draw >= limit);
  return static_cast<int>(lo + static_cast<std::int64_t>(draw % span));
}

double Rng::Normal() {
  // Box-Muller; the second variate is discarded to keep the stream stateless.
  double u1 = Uniform();
  while (u1 <= 0.0) u1 = Uniform();
  const double u2 = Uniform();
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

bool Rng::Bernoulli(double p) { return Uniform() < p; }

Rng Rng::Fork(std::uint64_t stream_id) const {
  return Rng(SplitMix64(seed_ ^ SplitMix64(stream_id + 0x5851F42D4C957F2DULL)));
}

std::vector<int> Rng::SampleWithoutReplacement(int population, int count) {
  Require(count >= 0 && count <= population, ErrorCategory::kPrecondition,
          "cannot draw " + std::to_string(count) + " of " +
              std::to_string(population) + " without replacement");
  std::vector<int> pool(static_cast<std::size_t>(population));
  std::iota(pool.begin(), pool.end(), 0);
  // Partial Fisher-Yates.
  for (int i = 0; i < count; ++i) {
    const int j = UniformInt(i, population - 1);
    std::swap(pool[static_cast<std::size_t>(i)],
              pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(count));
  return pool;
}

}  // namespace tsex
