// wavprom/tests/folds-test.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <map>
#include <set>

#include "wavprom/base/error.h"
#include "wavprom/base/rng.h"
#include "wavprom/corpus/folds.h"

using namespace wavprom;

namespace {

std::vector<UtteranceKey> SyntheticKeys(int num_speakers, int utts_per_speaker,
                                        uint64_t seed) {
  Rng rng(seed);
  std::vector<UtteranceKey> keys;
  for (int s = 0; s < num_speakers; ++s)
    for (int u = 0; u < utts_per_speaker; ++u)
      keys.push_back({StrCat("s", s, "_u", u), StrCat("s", s),
                      static_cast<int>(rng.UniformInt(50, 70))});
  return keys;
}

void CheckPlanInvariants(const FoldPlan& plan, const std::vector<UtteranceKey>& keys,
                         double max_ratio) {
  // Every utterance assigned exactly once.
  REQUIRE(plan.assignments.size() == keys.size());
  // Speaker-disjoint: all of a speaker's utterances share one fold.
  std::map<std::string, int> speaker_fold;
  std::vector<int> fold_words(plan.k, 0);
  for (const auto& k : keys) {
    int f = plan.FoldOf(k.utterance_id);
    REQUIRE(f >= 0);
    REQUIRE(f < plan.k);
    auto [it, inserted] = speaker_fold.emplace(k.speaker_id, f);
    if (!inserted) REQUIRE(it->second == f);
    fold_words[f] += k.word_count;
  }
  // Pairwise speaker-set intersections empty is implied by the single
  // assignment per speaker; also require balance.
  int lo = *std::min_element(fold_words.begin(), fold_words.end());
  int hi = *std::max_element(fold_words.begin(), fold_words.end());
  REQUIRE(lo > 0);
  CHECK(static_cast<double>(hi) / lo <= max_ratio);
}

}  // namespace

TEST_CASE("three equal speakers, k=3: one speaker per fold") {
  std::vector<UtteranceKey> keys = {
      {"a0", "sa", 60}, {"b0", "sb", 60}, {"c0", "sc", 60}};
  FoldPlan plan = MakeFolds(keys, 3, 42);
  std::set<int> folds;
  for (const auto& k : keys) folds.insert(plan.FoldOf(k.utterance_id));
  CHECK(folds.size() == 3);
}

TEST_CASE("35 speakers, k=3: balanced speaker-disjoint folds") {
  auto keys = SyntheticKeys(35, 4, 9);
  FoldPlan plan = MakeFolds(keys, 3, 1234);
  CheckPlanInvariants(plan, keys, 1.3);
}

TEST_CASE("fold plans are deterministic given the seed") {
  auto keys = SyntheticKeys(12, 3, 5);
  FoldPlan a = MakeFolds(keys, 3, 99);
  FoldPlan b = MakeFolds(keys, 3, 99);
  CHECK(a.assignments == b.assignments);
}

TEST_CASE("fewer speakers than folds is an error") {
  auto keys = SyntheticKeys(2, 3, 1);
  CHECK_THROWS_AS(MakeFolds(keys, 3, 0), ValidationError);
  CHECK_THROWS_AS(MakeFolds(keys, 1, 0), ValidationError);
}

TEST_CASE("inner folds partition a training split") {
  // 4 speakers, k=4: one speaker per fold.
  auto keys = SyntheticKeys(4, 2, 3);
  FoldPlan plan = InnerFolds(keys, 4, 7);
  std::set<int> folds;
  for (const auto& k : keys) folds.insert(plan.FoldOf(k.utterance_id));
  CHECK(folds.size() == 4);

  // Larger split: two thirds of a 35-speaker corpus into 4 inner folds.
  auto big = SyntheticKeys(24, 4, 11);
  FoldPlan inner = InnerFolds(big, 4, 21);
  CheckPlanInvariants(inner, big, 1.3);

  // Precondition: 3 speakers cannot make 4 folds.
  auto small = SyntheticKeys(3, 2, 2);
  CHECK_THROWS_AS(InnerFolds(small, 4, 0), ValidationError);
}

TEST_CASE("fold invariants hold across seeds") {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    auto keys = SyntheticKeys(10 + static_cast<int>(seed), 3, seed);
    FoldPlan plan = MakeFolds(keys, 3, seed);
    CheckPlanInvariants(plan, keys, 1.3);
  }
}

TEST_CASE("unbalanceable corpora are rejected") {
  // One speaker holds nearly all the words.
  std::vector<UtteranceKey> keys = {{"a0", "sa", 10000},
                                    {"b0", "sb", 10},
                                    {"c0", "sc", 10}};
  CHECK_THROWS_WITH_AS(MakeFolds(keys, 3, 0), doctest::Contains("balance"),
                       ValidationError);
}
