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

#ifndef TSEX_WAV_IO_H_
#define TSEX_WAV_IO_H_

#include <filesystem>

#include "tsex/types.h"

namespace tsex {

// PCM16 full scale. Samples map to integers by round(x * kPcmScale), so any
// value already on that grid survives a write/read cycle bit-exactly.
inline constexpr double kPcmScale = 32767.0;

// Rounds every sample onto the PCM16 grid (with saturation).
Vec QuantizeToPcm16(const Vec& samples);

// Reads a mono 16-bit PCM WAV file at kSampleRate.
Waveform ReadWav(const std::filesystem::path& path);

// Writes mono 16-bit PCM. Samples outside [-1, 1] saturate.
void WriteWav(const std::filesystem::path& path, const Waveform& waveform);

}  // namespace tsex

#endif  // TSEX_WAV_IO_H_
