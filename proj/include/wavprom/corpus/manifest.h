// wavprom/corpus/manifest.h

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

#ifndef WAVPROM_CORPUS_MANIFEST_H_
#define WAVPROM_CORPUS_MANIFEST_H_

#include <string>

#include "wavprom/corpus/types.h"

namespace wavprom {

struct ManifestOptions {
  // Fixed segment length. 0 means "use the corpus maximum", i.e. the longest
  // included-pause + word span found in the data.
  int max_segment_samples = kDefaultMaxSegmentSamples;
  // Per-segment peak normalization to max |sample| = 1. Off by default.
  bool normalize_amplitude = false;
  int jobs = 1;
};

/// Loads a JSON-lines manifest (one object per word) and the referenced WAV
/// files, returning prepared utterances in manifest order. Relative audio
/// paths are resolved against the manifest's directory. Errors carry the
/// offending line number.
///
/// Row fields: utterance_id, speaker_id, word_index, token, audio_path,
/// word_start_s, word_end_s, pause_before_ms, prominence_votes,
/// boundary_votes, num_raters. Words of an utterance must be contiguous and
/// ordered by word_index.
Corpus LoadManifest(const std::string& path, const ManifestOptions& options = {});

}  // namespace wavprom

#endif  // WAVPROM_CORPUS_MANIFEST_H_
