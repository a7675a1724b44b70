// wavprom/train/checkpoint.h

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

#ifndef WAVPROM_TRAIN_CHECKPOINT_H_
#define WAVPROM_TRAIN_CHECKPOINT_H_

#include <map>
#include <string>
#include <vector>

#include "wavprom/mtl/model.h"

namespace wavprom {

struct TrainEpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
};

// Everything needed to reproduce inference: the spec snapshot (including the
// frozen loss scales), every parameter tensor and batch-norm buffer, the
// training-fold feature statistics and the validation history.
struct Checkpoint {
  ModelSpec spec;
  std::map<std::string, Vector> tensors;
  FeatureStats stats_prominence;
  FeatureStats stats_boundary;
  std::vector<TrainEpochStats> history;
  int best_epoch = -1;
  double best_val_loss = 0.0;
  uint64_t seed = 0;

  static Checkpoint FromModel(Model* model);
  /// Copies tensors into a model built from the same spec; unknown or missing
  /// tensor names are errors.
  void ApplyTo(Model* model) const;
  /// Convenience: construct a model from the stored spec and load it.
  std::unique_ptr<Model> BuildModel() const;

  void Save(const std::string& path) const;
  static Checkpoint Load(const std::string& path);
};

}  // namespace wavprom

#endif  // WAVPROM_TRAIN_CHECKPOINT_H_
