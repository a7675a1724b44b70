// wavprom/synth/generator.h

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

#ifndef WAVPROM_SYNTH_GENERATOR_H_
#define WAVPROM_SYNTH_GENERATOR_H_

#include <cstdint>
#include <string>
#include <vector>

namespace wavprom {

// Synthetic corpus with a known acoustic-to-label rule. Each word is a
// harmonic tone (first 5 harmonics, linear F0 ramp, raised-cosine envelope)
// whose duration, intensity and F0 excursion drive the planted prominence
// degree; pauses drive the boundary degree. Known speech corpora with rater
// annotations are not redistributable, so pipeline correctness and
// learnability are exercised against this generator instead.
struct SynthConfig {
  int num_speakers = 6;
  int utterances_per_speaker = 8;
  int words_min = 50;
  int words_max = 70;
  double base_f0_min_hz = 180.0;
  double base_f0_max_hz = 240.0;
  double noise_level = 0.01;
  uint64_t seed = 1;

  // Per-word acoustic ranges.
  double duration_min_ms = 70.0;
  double duration_max_ms = 160.0;
  double amplitude_min = 0.15;
  double amplitude_max = 0.90;
  double excursion_min = 0.05;
  double excursion_max = 0.55;

  // Pauses: ordinary inter-word gaps vs phrase-boundary pauses.
  double pause_min_ms = 15.0;
  double pause_max_ms = 80.0;
  double boundary_pause_min_ms = 130.0;
  double boundary_pause_max_ms = 250.0;
  double boundary_prob = 0.18;

  // Prominent words tend to be jointly longer, louder and higher-pitched;
  // this loading couples the three draws through a shared latent variable.
  double latent_loading = 0.75;
  // Pre-boundary lengthening factor applied to word duration.
  double boundary_lengthening = 1.3;

  int num_raters = 7;
  int jobs = 1;
};

// Ground-truth generating parameters of one word, as recorded in oracle.json.
struct OracleWord {
  std::string utterance_id;
  int word_index = 0;
  double duration_ms = 0.0;
  double amplitude = 0.0;
  double excursion = 0.0;
  double pause_after_ms = 0.0;
  double base_f0_hz = 0.0;
  double prominence_score = 0.0;  // pre-quantization
  double boundary_score = 0.0;
  int prominence_votes = 0;
  int boundary_votes = 0;
};

struct GeneratedCorpus {
  std::string manifest_path;
  std::string oracle_path;
  int num_utterances = 0;
  int num_words = 0;
};

/// Planted rule: sigmoid(z(d) + z(a) + z(e)) with z-scores computed within
/// the utterance; a zero-variance feature contributes z = 0.
std::vector<double> PlantedProminence(const std::vector<double>& duration_ms,
                                      const std::vector<double>& amplitude,
                                      const std::vector<double>& excursion);

/// Planted boundary score: pause / (pause + 150 ms), monotone in the pause
/// following the word.
double PlantedBoundary(double pause_after_ms);

/// Quantizes a degree in [0,1] to rater votes, rounding half away from zero.
int QuantizeToVotes(double score, int num_raters);

/// Writes manifest.jsonl, wav/<utterance>.wav and oracle.json under out_dir.
/// Byte-identical output for identical (config, seed).
GeneratedCorpus GenerateCorpus(const SynthConfig& config, const std::string& out_dir);

}  // namespace wavprom

#endif  // WAVPROM_SYNTH_GENERATOR_H_
