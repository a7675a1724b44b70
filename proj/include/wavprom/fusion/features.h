// wavprom/fusion/features.h

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

#ifndef WAVPROM_FUSION_FEATURES_H_
#define WAVPROM_FUSION_FEATURES_H_

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "wavprom/base/matrix.h"
#include "wavprom/corpus/types.h"

namespace wavprom {

// Precomputed word-level acoustic feature vectors, keyed by
// (utterance_id, word_index). The prominence set is 34-dimensional, the
// boundary set 27-dimensional.
struct WordFeatureTable {
  int dim = 0;
  std::map<std::pair<std::string, int>, Vector> rows;

  const Vector* Find(const std::string& utterance_id, int word_index) const {
    auto it = rows.find({utterance_id, word_index});
    return it == rows.end() ? nullptr : &it->second;
  }
};

/// Loads a feature CSV with header `utterance_id,word_index,f1..fD`.
/// Dimension mismatches and malformed rows raise errors naming the word.
WordFeatureTable LoadFeatureTable(const std::string& path, int expected_dim);

void WriteFeatureTable(const WordFeatureTable& table, const std::string& path);

/// Throws if any corpus word is missing from the table.
void ValidateCoverage(const WordFeatureTable& table, const Corpus& corpus);

// Per-dimension standardization statistics, computed on training-fold words
// only and reused for validation/test (and stored in checkpoints).
struct FeatureStats {
  Vector mean;
  Vector sd;
};

FeatureStats ComputeFeatureStats(
    const WordFeatureTable& table,
    const std::vector<std::pair<std::string, int>>& train_words);

Vector Standardize(const Vector& raw, const FeatureStats& stats);

/// Concatenates the per-word inputs in fixed order [cnn, acoustic, lexical];
/// absent sources are simply skipped, so every sub-vector is recoverable from
/// its slice. Non-finite values are rejected.
Vector FuseWordVector(const Vector& cnn_embed, const Vector* acoustic,
                      const Vector* lexical);

/// Synthetic stand-in extractor for desk-scale runs without an external
/// feature table. 34 dimensions: 17 word-level descriptors (durations,
/// pauses, intensity aggregates, autocorrelation F0 estimates over thirds,
/// envelope shape) plus 17 mel-spaced Goertzel band log-energies. The
/// 27-dimensional boundary variant keeps 10 pause/duration-centric
/// descriptors plus the same 17 bands. It does not claim to reproduce any
/// externally defined feature set.
WordFeatureTable ComputeStandinFeatures(const Corpus& corpus, int dim);

}  // namespace wavprom

#endif  // WAVPROM_FUSION_FEATURES_H_
