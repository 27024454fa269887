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

#include "tsex/wav_io.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "tsex/errors.h"

namespace tsex {
namespace {

std::int16_t ToPcm(double x) {
  const double scaled = std::round(x * kPcmScale);
  return static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
}

void PutU32(std::ofstream& out, std::uint32_t v) {
  const std::array<char, 4> bytes = {
      static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
      static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(bytes.data(), 4);
}

void PutU16(std::ofstream& out, std::uint16_t v) {
  const std::array<char, 2> bytes = {static_cast<char>(v & 0xFF),
                                     static_cast<char>((v >> 8) & 0xFF)};
  out.write(bytes.data(), 2);
}

std::uint32_t GetU32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t GetU16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace

Vec QuantizeToPcm16(const Vec& samples) {
  Vec out(samples.size());
  for (Eigen::Index i = 0; i < samples.size(); ++i) {
    out[i] = static_cast<double>(ToPcm(samples[i])) / kPcmScale;
  }
  return out;
}

Waveform ReadWav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  Require(in.good(), ErrorCategory::kIo, "cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  const std::string where = " in " + path.string();
  Require(bytes.size() >= 12 && std::memcmp(bytes.data(), "RIFF", 4) == 0 &&
              std::memcmp(bytes.data() + 8, "WAVE", 4) == 0,
          ErrorCategory::kParse, "not a RIFF/WAVE file" + where);

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::size_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = GetU32(chunk + 4);
    Require(pos + 8 + size <= bytes.size(), ErrorCategory::kParse,
            "truncated chunk" + where);
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      Require(size >= 16, ErrorCategory::kParse, "short fmt chunk" + where);
      format = GetU16(chunk + 8);
      channels = GetU16(chunk + 10);
      rate = GetU32(chunk + 12);
      bits = GetU16(chunk + 22);
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = chunk + 8;
      data_size = size;
    }
    pos += 8 + size + (size & 1U);
  }
  Require(format == 1 && bits == 16, ErrorCategory::kParse,
          "only 16-bit PCM is supported" + where);
  Require(channels == 1, ErrorCategory::kParse,
          "only mono audio is supported" + where);
  Require(rate == static_cast<std::uint32_t>(kSampleRate),
          ErrorCategory::kParse,
          "sample rate " + std::to_string(rate) + " != " +
              std::to_string(kSampleRate) + where);
  Require(data != nullptr, ErrorCategory::kParse, "missing data chunk" + where);

  const std::size_t count = data_size / 2;
  Vec samples(static_cast<Eigen::Index>(count));
  for (std::size_t i = 0; i < count; ++i) {
    const auto raw = static_cast<std::int16_t>(GetU16(data + 2 * i));
    samples[static_cast<Eigen::Index>(i)] =
        static_cast<double>(raw) / kPcmScale;
  }
  return Waveform(std::move(samples), kSampleRate);
}

void WriteWav(const std::filesystem::path& path, const Waveform& waveform) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  Require(out.good(), ErrorCategory::kIo, "cannot write " + path.string());
  const auto data_bytes = static_cast<std::uint32_t>(waveform.size() * 2);
  out.write("RIFF", 4);
  PutU32(out, 36 + data_bytes);
  out.write("WAVEfmt ", 8);
  PutU32(out, 16);
  PutU16(out, 1);
  PutU16(out, 1);
  PutU32(out, static_cast<std::uint32_t>(waveform.sample_rate()));
  PutU32(out, static_cast<std::uint32_t>(waveform.sample_rate()) * 2);
  PutU16(out, 2);
  PutU16(out, 16);
  out.write("data", 4);
  PutU32(out, data_bytes);
  std::vector<char> buffer(waveform.size() * 2);
  for (std::size_t i = 0; i < waveform.size(); ++i) {
    const auto v = static_cast<std::uint16_t>(
        ToPcm(waveform.samples()[static_cast<Eigen::Index>(i)]));
    buffer[2 * i] = static_cast<char>(v & 0xFF);
    buffer[2 * i + 1] = static_cast<char>(v >> 8);
  }
  out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
  Require(out.good(), ErrorCategory::kIo, "write failed for " + path.string());
}

}  // namespace tsex
