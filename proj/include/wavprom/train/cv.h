// wavprom/train/cv.h

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

#ifndef WAVPROM_TRAIN_CV_H_
#define WAVPROM_TRAIN_CV_H_

#include <string>
#include <vector>

#include "wavprom/corpus/folds.h"
#include "wavprom/train/trainer.h"

namespace wavprom {

// Speaker-independent evaluation protocol: outer speaker-disjoint folds for
// testing, inner speaker-disjoint folds on each training split for early
// stopping, and per-test-fold averaging of the inner models' predictions.
struct CvConfig {
  int outer_folds = 3;
  int inner_folds = 4;
  double balance_ratio = 1.3;
  uint64_t seed = 1;
  int jobs = 1;  // inner/outer trainings are independent
};

struct CvFoldResult {
  int fold = 0;
  double pearson_prominence = 0.0;
  // NaN when the model has no boundary head.
  double pearson_boundary = 0.0;
  int num_test_words = 0;
  std::vector<std::string> test_speakers;
};

struct CvModelEntry {
  int outer_fold = 0;
  int inner_fold = 0;
  int best_epoch = 0;
  int epochs_run = 0;
  double best_val_loss = 0.0;
};

// One row of the optional per-word prediction dump.
struct CvPrediction {
  std::string utterance_id;
  int word_index = 0;
  std::string token;
  int fold = 0;
  double prominence_score = 0.0;
  double boundary_score = 0.0;
  double prominence_degree = 0.0;
  double boundary_degree = 0.0;
};

struct CvReport {
  std::string architecture;
  std::vector<CvFoldResult> folds;
  std::vector<CvModelEntry> models;
  double mean_r = 0.0;
  double sd_r = 0.0;
  uint64_t seed = 0;
  std::string config_hash;

  std::string ToJson() const;
  /// Summary table: one row per architecture result, r mean +/- sd.
  std::string SummaryTable() const;
};

/// Runs the whole protocol and returns per-fold Pearson correlations plus
/// their mean and standard deviation. Checkpoints and pooled test-fold
/// predictions are returned through the optional out parameters
/// (checkpoints indexed [outer * inner_folds + inner]).
CvReport RunCv(const Corpus& corpus, const ModelSpec& model_spec,
               const TrainConfig& train_cfg, const CvConfig& cv_cfg,
               const FusionSources* sources = nullptr,
               std::vector<Checkpoint>* out_checkpoints = nullptr,
               std::vector<CvPrediction>* out_predictions = nullptr);

std::string HashConfig(const ModelSpec& spec, const TrainConfig& train_cfg,
                       const CvConfig& cv_cfg);

}  // namespace wavprom

#endif  // WAVPROM_TRAIN_CV_H_
