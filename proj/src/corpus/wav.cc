// wavprom/corpus/wav.cc

// Copyright 2025  Wavprom Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "wavprom/corpus/wav.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "wavprom/base/error.h"

namespace wavprom {

namespace {

uint32_t ReadU32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}
uint16_t ReadU16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}
void PutU32(std::vector<uint8_t>* v, uint32_t x) {
  v->push_back(x & 0xff);
  v->push_back((x >> 8) & 0xff);
  v->push_back((x >> 16) & 0xff);
  v->push_back((x >> 24) & 0xff);
}
void PutU16(std::vector<uint8_t>* v, uint16_t x) {
  v->push_back(x & 0xff);
  v->push_back((x >> 8) & 0xff);
}

}  // namespace

std::vector<double> ReadWav(const std::string& path, double expected_rate_hz) {
  std::ifstream in(path, std::ios::binary);
  if (!in) ThrowError("cannot open WAV file: ", path);
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    ThrowValidation("not a RIFF/WAVE file: ", path);

  size_t pos = 12;
  uint16_t channels = 0, bits = 0;
  uint32_t rate = 0;
  const uint8_t* data = nullptr;
  uint32_t data_len = 0;
  while (pos + 8 <= bytes.size()) {
    const uint8_t* hdr = bytes.data() + pos;
    uint32_t chunk_len = ReadU32(hdr + 4);
    if (pos + 8 + chunk_len > bytes.size())
      ThrowValidation("truncated WAV chunk in ", path);
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (chunk_len < 16) ThrowValidation("short fmt chunk in ", path);
      uint16_t format = ReadU16(hdr + 8);
      channels = ReadU16(hdr + 10);
      rate = ReadU32(hdr + 12);
      bits = ReadU16(hdr + 22);
      if (format != 1) ThrowValidation("WAV not linear PCM (format ", format, "): ", path);
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = hdr + 8;
      data_len = chunk_len;
    }
    pos += 8 + chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }
  if (data == nullptr) ThrowValidation("WAV has no data chunk: ", path);
  if (channels != 1) ThrowValidation("WAV not mono (", channels, " channels): ", path);
  if (bits != 16) ThrowValidation("WAV not 16-bit (", bits, "): ", path);
  if (rate != static_cast<uint32_t>(expected_rate_hz))
    ThrowValidation("WAV sample rate mismatch: got ", rate, " Hz, expected ",
                    static_cast<uint32_t>(expected_rate_hz), " Hz: ", path);

  size_t n = data_len / 2;
  std::vector<double> samples(n);
  for (size_t i = 0; i < n; ++i) {
    int16_t s = static_cast<int16_t>(data[2 * i] | (data[2 * i + 1] << 8));
    samples[i] = static_cast<double>(s) / 32768.0;
  }
  return samples;
}

void WriteWav(const std::string& path, const std::vector<double>& samples,
              double rate_hz) {
  std::vector<uint8_t> bytes;
  bytes.reserve(44 + samples.size() * 2);
  const uint32_t rate = static_cast<uint32_t>(rate_hz);
  const uint32_t data_len = static_cast<uint32_t>(samples.size() * 2);

  bytes.insert(bytes.end(), {'R', 'I', 'F', 'F'});
  PutU32(&bytes, 36 + data_len);
  bytes.insert(bytes.end(), {'W', 'A', 'V', 'E'});
  bytes.insert(bytes.end(), {'f', 'm', 't', ' '});
  PutU32(&bytes, 16);
  PutU16(&bytes, 1);  // PCM
  PutU16(&bytes, 1);  // mono
  PutU32(&bytes, rate);
  PutU32(&bytes, rate * 2);  // byte rate
  PutU16(&bytes, 2);         // block align
  PutU16(&bytes, 16);        // bits
  bytes.insert(bytes.end(), {'d', 'a', 't', 'a'});
  PutU32(&bytes, data_len);
  for (double s : samples) {
    int v = static_cast<int>(std::lrint(std::clamp(s, -1.0, 1.0) * 32768.0));
    v = std::clamp(v, -32768, 32767);
    PutU16(&bytes, static_cast<uint16_t>(static_cast<int16_t>(v)));
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) ThrowError("cannot open for writing: ", path);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) ThrowError("short write: ", path);
}

}  // namespace wavprom
