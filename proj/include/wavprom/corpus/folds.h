// wavprom/corpus/folds.h

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

#ifndef WAVPROM_CORPUS_FOLDS_H_
#define WAVPROM_CORPUS_FOLDS_H_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "wavprom/corpus/types.h"

namespace wavprom {

// Speaker-disjoint fold assignment over utterances. All utterances of a
// speaker land in the same fold and folds are balanced by word count (the
// evaluation unit), not by utterance count.
struct FoldPlan {
  std::map<std::string, int> assignments;  // utterance_id -> fold
  int k = 0;

  int FoldOf(const std::string& utterance_id) const;
  std::vector<std::string> UtterancesInFold(int fold) const;
};

// Minimal view of an utterance needed for fold planning; lets tests exercise
// the planner without audio.
struct UtteranceKey {
  std::string utterance_id;
  std::string speaker_id;
  int word_count = 0;
};

std::vector<UtteranceKey> CorpusKeys(const Corpus& corpus);

/// Partitions utterances into k speaker-disjoint folds, deterministic for a
/// given seed. Throws if there are fewer speakers than folds or if no
/// assignment satisfies max/min word-count ratio <= balance_ratio.
FoldPlan MakeFolds(const std::vector<UtteranceKey>& utterances, int k,
                   uint64_t seed, double balance_ratio = 1.3);

/// Same as MakeFolds restricted to one training split; default k = 4.
FoldPlan InnerFolds(const std::vector<UtteranceKey>& train_split, int k = 4,
                    uint64_t seed = 0, double balance_ratio = 1.3);

}  // namespace wavprom

#endif  // WAVPROM_CORPUS_FOLDS_H_
