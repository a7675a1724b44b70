// wavprom/corpus/types.h

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

#ifndef WAVPROM_CORPUS_TYPES_H_
#define WAVPROM_CORPUS_TYPES_H_

#include <string>
#include <vector>

namespace wavprom {

constexpr double kSampleRateHz = 16000.0;
// Default fixed segment length: 28,660 samples (~1.79 s at 16 kHz).
constexpr int kDefaultMaxSegmentSamples = 28660;
// A leading silent pause is included in each word segment, capped at 500 ms.
constexpr double kPauseCapMs = 500.0;

// Raw annotator vote counts for one word.
struct RaterVotes {
  int prominence_votes = 0;
  int boundary_votes = 0;
  int num_raters = 7;
};

// Per-word regression targets: vote fractions in [0, 1].
struct ProsodyLabels {
  double prominence_degree = 0.0;
  double boundary_degree = 0.0;
  RaterVotes votes;
};

// One word's prepared waveform window plus metadata. `samples` always has
// the corpus-wide fixed length after preparation.
struct WordSegment {
  std::vector<double> samples;
  std::string token;
  double pause_before_ms = 0.0;  // pre-clip value, retained as metadata
  double start_s = 0.0;
  double end_s = 0.0;
};

struct Utterance {
  std::string utterance_id;
  std::string speaker_id;
  std::vector<WordSegment> words;
  std::vector<ProsodyLabels> labels;

  int NumWords() const { return static_cast<int>(words.size()); }
};

struct Corpus {
  std::vector<Utterance> utterances;
  int max_segment_samples = kDefaultMaxSegmentSamples;

  int TotalWords() const {
    int n = 0;
    for (const auto& u : utterances) n += u.NumWords();
    return n;
  }
};

/// Scales votes to degree labels (exact rational votes / num_raters).
/// Throws ValidationError naming the offending field if a count is out of
/// range.
ProsodyLabels AggregateVotes(const RaterVotes& votes);

/// Assembles the fixed-length window for one word:
///   [most recent min(pause, 500 ms) of pre-word audio][word][trailing zeros]
/// `pause_audio` is the audio immediately preceding the word (may be shorter
/// than the pause; the missing part is filled with zeros, which is
/// acoustically equivalent for silence). If pause + word exceed `max_samples`
/// the word is truncated from its end.
std::vector<double> PrepareSegment(const std::vector<double>& word_samples,
                                   const std::vector<double>& pause_audio,
                                   double pause_before_ms, int max_samples);

}  // namespace wavprom

#endif  // WAVPROM_CORPUS_TYPES_H_
