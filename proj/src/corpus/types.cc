// wavprom/corpus/types.cc

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

#include "wavprom/corpus/types.h"

#include <algorithm>
#include <cmath>

#include "wavprom/base/error.h"

namespace wavprom {

ProsodyLabels AggregateVotes(const RaterVotes& votes) {
  if (votes.num_raters < 1)
    ThrowValidation("num_raters must be >= 1, got ", votes.num_raters);
  if (votes.prominence_votes < 0 || votes.prominence_votes > votes.num_raters)
    ThrowValidation("prominence_votes out of range: ", votes.prominence_votes,
                    " (num_raters ", votes.num_raters, ")");
  if (votes.boundary_votes < 0 || votes.boundary_votes > votes.num_raters)
    ThrowValidation("boundary_votes out of range: ", votes.boundary_votes,
                    " (num_raters ", votes.num_raters, ")");
  ProsodyLabels labels;
  labels.votes = votes;
  labels.prominence_degree =
      static_cast<double>(votes.prominence_votes) / votes.num_raters;
  labels.boundary_degree =
      static_cast<double>(votes.boundary_votes) / votes.num_raters;
  return labels;
}

std::vector<double> PrepareSegment(const std::vector<double>& word_samples,
                                   const std::vector<double>& pause_audio,
                                   double pause_before_ms, int max_samples) {
  if (word_samples.empty()) ThrowValidation("prepare_segment: empty word waveform");
  if (pause_before_ms < 0.0)
    ThrowValidation("prepare_segment: negative pause_before_ms");
  if (max_samples < 1) ThrowValidation("prepare_segment: max_samples must be >= 1");

  const double included_ms = std::min(pause_before_ms, kPauseCapMs);
  int pause_len = static_cast<int>(std::llround(included_ms * kSampleRateHz / 1000.0));
  pause_len = std::min(pause_len, max_samples);

  std::vector<double> out(static_cast<size_t>(max_samples), 0.0);

  // Most recent `pause_len` samples of pre-word audio; left-fill with zeros
  // when less audio is available.
  int avail = std::min<int>(pause_len, static_cast<int>(pause_audio.size()));
  for (int i = 0; i < avail; ++i)
    out[pause_len - avail + i] = pause_audio[pause_audio.size() - avail + i];

  int word_len =
      std::min<int>(static_cast<int>(word_samples.size()), max_samples - pause_len);
  std::copy(word_samples.begin(), word_samples.begin() + word_len,
            out.begin() + pause_len);
  return out;
}

}  // namespace wavprom
