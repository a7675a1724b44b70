// wavprom/corpus/folds.cc

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

#include "wavprom/corpus/folds.h"

#include <algorithm>
#include <limits>
#include <numeric>

#include "wavprom/base/error.h"
#include "wavprom/base/rng.h"

namespace wavprom {

int FoldPlan::FoldOf(const std::string& utterance_id) const {
  auto it = assignments.find(utterance_id);
  if (it == assignments.end())
    ThrowValidation("utterance not in fold plan: ", utterance_id);
  return it->second;
}

std::vector<std::string> FoldPlan::UtterancesInFold(int fold) const {
  std::vector<std::string> ids;
  for (const auto& [id, f] : assignments)
    if (f == fold) ids.push_back(id);
  return ids;
}

std::vector<UtteranceKey> CorpusKeys(const Corpus& corpus) {
  std::vector<UtteranceKey> keys;
  keys.reserve(corpus.utterances.size());
  for (const auto& u : corpus.utterances)
    keys.push_back({u.utterance_id, u.speaker_id, u.NumWords()});
  return keys;
}

namespace {

struct SpeakerLoad {
  std::string speaker_id;
  int words = 0;
};

double Ratio(const std::vector<int>& fold_words) {
  int lo = *std::min_element(fold_words.begin(), fold_words.end());
  int hi = *std::max_element(fold_words.begin(), fold_words.end());
  if (lo <= 0) return std::numeric_limits<double>::infinity();
  return static_cast<double>(hi) / lo;
}

}  // namespace

FoldPlan MakeFolds(const std::vector<UtteranceKey>& utterances, int k,
                   uint64_t seed, double balance_ratio) {
  if (k < 2) ThrowValidation("make_folds: k must be >= 2, got ", k);

  std::map<std::string, int> speaker_words;
  for (const auto& u : utterances) speaker_words[u.speaker_id] += u.word_count;
  if (static_cast<int>(speaker_words.size()) < k)
    ThrowValidation("make_folds: ", speaker_words.size(), " speakers < k = ", k);

  std::vector<SpeakerLoad> speakers;
  speakers.reserve(speaker_words.size());
  for (const auto& [id, words] : speaker_words) speakers.push_back({id, words});

  // Seeded shuffle breaks ties among equal-count speakers, then longest
  // processing time greedy: heaviest speaker to the lightest fold.
  Rng rng(seed ^ 0x666f6c6473ULL);
  rng.Shuffle(&speakers);
  std::stable_sort(speakers.begin(), speakers.end(),
                   [](const SpeakerLoad& a, const SpeakerLoad& b) {
                     return a.words > b.words;
                   });

  std::vector<int> fold_words(k, 0);
  std::map<std::string, int> speaker_fold;
  for (const auto& s : speakers) {
    int best = 0;
    for (int f = 1; f < k; ++f)
      if (fold_words[f] < fold_words[best]) best = f;
    speaker_fold[s.speaker_id] = best;
    fold_words[best] += s.words;
  }

  // Local improvement on the greedy assignment: single-speaker moves and
  // pairwise swaps between folds, accepted when they shrink the global
  // word-count spread. Greedy LPT is already near-balanced for ordinary
  // corpora; this pass mops up the rest.
  auto fold_size = [&](int f) {
    int n = 0;
    for (const auto& s : speakers)
      if (speaker_fold[s.speaker_id] == f) ++n;
    return n;
  };
  auto spread_of = [&](const std::vector<int>& words) {
    return *std::max_element(words.begin(), words.end()) -
           *std::min_element(words.begin(), words.end());
  };
  for (int iter = 0; iter < 2000; ++iter) {
    int spread = spread_of(fold_words);
    if (Ratio(fold_words) <= balance_ratio) break;

    int best_gain = 0;
    const SpeakerLoad* move_speaker = nullptr;
    int move_to = -1;
    const SpeakerLoad* swap_a = nullptr;
    const SpeakerLoad* swap_b = nullptr;

    for (const auto& s : speakers) {
      int from = speaker_fold[s.speaker_id];
      if (fold_size(from) <= 1) continue;
      for (int to = 0; to < k; ++to) {
        if (to == from) continue;
        std::vector<int> trial = fold_words;
        trial[from] -= s.words;
        trial[to] += s.words;
        int gain = spread - spread_of(trial);
        if (gain > best_gain) {
          best_gain = gain;
          move_speaker = &s;
          move_to = to;
          swap_a = swap_b = nullptr;
        }
      }
    }
    for (size_t i = 0; i < speakers.size(); ++i) {
      for (size_t j = i + 1; j < speakers.size(); ++j) {
        int fi = speaker_fold[speakers[i].speaker_id];
        int fj = speaker_fold[speakers[j].speaker_id];
        if (fi == fj) continue;
        std::vector<int> trial = fold_words;
        trial[fi] += speakers[j].words - speakers[i].words;
        trial[fj] += speakers[i].words - speakers[j].words;
        int gain = spread - spread_of(trial);
        if (gain > best_gain) {
          best_gain = gain;
          swap_a = &speakers[i];
          swap_b = &speakers[j];
          move_speaker = nullptr;
        }
      }
    }

    if (move_speaker != nullptr) {
      int from = speaker_fold[move_speaker->speaker_id];
      speaker_fold[move_speaker->speaker_id] = move_to;
      fold_words[from] -= move_speaker->words;
      fold_words[move_to] += move_speaker->words;
    } else if (swap_a != nullptr) {
      int fa = speaker_fold[swap_a->speaker_id];
      int fb = speaker_fold[swap_b->speaker_id];
      speaker_fold[swap_a->speaker_id] = fb;
      speaker_fold[swap_b->speaker_id] = fa;
      fold_words[fa] += swap_b->words - swap_a->words;
      fold_words[fb] += swap_a->words - swap_b->words;
    } else {
      break;
    }
  }

  double ratio = Ratio(fold_words);
  if (ratio > balance_ratio)
    ThrowValidation("make_folds: cannot balance folds to ratio <= ", balance_ratio,
                    " (achieved ", ratio, "); speaker word counts too skewed");

  FoldPlan plan;
  plan.k = k;
  for (const auto& u : utterances) {
    if (plan.assignments.count(u.utterance_id))
      ThrowValidation("make_folds: duplicate utterance_id '", u.utterance_id, "'");
    plan.assignments[u.utterance_id] = speaker_fold.at(u.speaker_id);
  }
  return plan;
}

FoldPlan InnerFolds(const std::vector<UtteranceKey>& train_split, int k,
                    uint64_t seed, double balance_ratio) {
  return MakeFolds(train_split, k, seed ^ 0x696e6e6572ULL, balance_ratio);
}

}  // namespace wavprom
