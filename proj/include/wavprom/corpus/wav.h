// wavprom/corpus/wav.h

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

#ifndef WAVPROM_CORPUS_WAV_H_
#define WAVPROM_CORPUS_WAV_H_

#include <string>
#include <vector>

namespace wavprom {

// Minimal RIFF/WAVE support for the one format the corpus uses:
// 16 kHz mono 16-bit linear PCM. Samples are scaled to [-1, 1).

/// Reads a WAV file; throws Error on I/O failure and ValidationError if the
/// format is not 16 kHz mono 16-bit PCM.
std::vector<double> ReadWav(const std::string& path, double expected_rate_hz = 16000.0);

/// Writes samples (clipped to [-1, 1]) as 16 kHz mono 16-bit PCM.
void WriteWav(const std::string& path, const std::vector<double>& samples,
              double rate_hz = 16000.0);

}  // namespace wavprom

#endif  // WAVPROM_CORPUS_WAV_H_
