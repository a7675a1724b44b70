// wavprom/train/trainer.h

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

#ifndef WAVPROM_TRAIN_TRAINER_H_
#define WAVPROM_TRAIN_TRAINER_H_

#include <limits>
#include <vector>

#include "wavprom/train/checkpoint.h"

namespace wavprom {

struct TrainConfig {
  double learning_rate = 0.001;  // Adam
  int batch_size = 64;           // utterances per step
  int max_epochs = 200;
  int early_stop_patience = 12;
  uint64_t seed = 0;
  // Early stopping monitors validation loss by default; optionally the
  // validation Pearson correlation instead.
  bool monitor_pearson = false;
  bool verbose = false;
};

// Early-stopping bookkeeping: training stops once the monitored criterion has
// failed to improve for `patience` consecutive epochs. With patience 12 and
// improvements only at epochs 1..5, training stops after epoch 17 and keeps
// epoch 5.
class EarlyStopping {
 public:
  explicit EarlyStopping(int patience) : patience_(patience) {}

  /// Records one epoch's criterion; returns true when it is a new best.
  bool Observe(double criterion) {
    ++epoch_;
    if (criterion < best_) {
      best_ = criterion;
      best_epoch_ = epoch_;
      bad_epochs_ = 0;
      return true;
    }
    ++bad_epochs_;
    return false;
  }
  bool ShouldStop() const { return bad_epochs_ >= patience_; }
  int best_epoch() const { return best_epoch_; }
  double best() const { return best_; }
  int epochs_seen() const { return epoch_; }

 private:
  int patience_;
  int epoch_ = 0;
  int best_epoch_ = 0;
  int bad_epochs_ = 0;
  double best_ = std::numeric_limits<double>::infinity();
};

// Adam with the conventional moment defaults; steps every trainable tensor
// exposed by the model.
class AdamOptimizer {
 public:
  AdamOptimizer(Model* model, double learning_rate, double beta1 = 0.9,
                double beta2 = 0.999, double eps = 1e-8);
  void Step();

 private:
  struct Slot {
    double* value;
    double* grad;
    int64_t size;
    size_t offset;
  };
  std::vector<Slot> slots_;
  Vector m_, v_;
  double lr_, beta1_, beta2_, eps_;
  int64_t t_ = 0;
};

/// Trains with early stopping on the validation split and returns the
/// best-validation checkpoint (the model is left loaded with it). Loss scale
/// constants are measured during the first epoch and frozen. Throws Error on
/// divergence (non-finite loss).
Checkpoint Train(Model* model, const std::vector<const Utterance*>& train_set,
                 const std::vector<const Utterance*>& val_set,
                 const FusionContext* fusion, const TrainConfig& cfg);

/// Inference-mode predictions for a set of utterances.
std::vector<Model::Output> PredictSet(Model* model,
                                      const std::vector<const Utterance*>& utterances,
                                      const FusionContext* fusion);

/// Arithmetic mean of the per-word scores of several checkpoints; all specs
/// must be identical.
std::vector<Model::Output> EnsemblePredict(
    const std::vector<Checkpoint>& checkpoints,
    const std::vector<const Utterance*>& test_set, const FusionSources* sources);

}  // namespace wavprom

#endif  // WAVPROM_TRAIN_TRAINER_H_
