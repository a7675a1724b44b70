// wavprom/train/trainer.cc

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

#include "wavprom/train/trainer.h"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>

#include "wavprom/base/error.h"
#include "wavprom/base/rng.h"
#include "wavprom/eval/metrics.h"

namespace wavprom {

AdamOptimizer::AdamOptimizer(Model* model, double learning_rate, double beta1,
                             double beta2, double eps)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(eps) {
  size_t total = 0;
  model->VisitParams([&](const ParamRef& ref) {
    if (!ref.trainable) return;
    slots_.push_back({ref.value, ref.grad, ref.size, total});
    total += static_cast<size_t>(ref.size);
  });
  m_.assign(total, 0.0);
  v_.assign(total, 0.0);
}

void AdamOptimizer::Step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (const Slot& slot : slots_) {
    double* m = m_.data() + slot.offset;
    double* v = v_.data() + slot.offset;
    for (int64_t i = 0; i < slot.size; ++i) {
      const double g = slot.grad[i];
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      slot.value[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
  }
}

namespace {

struct SetLoss {
  double total = 0.0;
  double prom_mse = 0.0;
  double bound_mse = 0.0;
  Vector prom_pred, prom_true;
};

// Pooled losses over a whole utterance set, inference mode.
SetLoss EvaluateSet(Model* model, const std::vector<const Utterance*>& utterances,
                    const FusionContext* fusion, bool keep_predictions) {
  PassContext ctx;
  ctx.training = false;
  SetLoss out;
  double prom_sq = 0.0, bound_sq = 0.0;
  int64_t n = 0;
  Model::Cache cache;  // recycled across utterances
  for (const Utterance* utt : utterances) {
    Model::Output pred = model->Forward(*utt, fusion, ctx, &cache);
    for (int i = 0; i < utt->NumWords(); ++i) {
      const double pt = utt->labels[i].prominence_degree;
      const double d = pred.prominence[i] - pt;
      prom_sq += d * d;
      if (model->HasBoundary()) {
        const double b = pred.boundary[i] - utt->labels[i].boundary_degree;
        bound_sq += b * b;
      }
      if (keep_predictions) {
        out.prom_pred.push_back(pred.prominence[i]);
        out.prom_true.push_back(pt);
      }
    }
    n += utt->NumWords();
  }
  WAVPROM_REQUIRE(n > 0, "trainer: empty evaluation set");
  out.prom_mse = prom_sq / static_cast<double>(n);
  out.bound_mse = model->HasBoundary() ? bound_sq / static_cast<double>(n) : 0.0;
  const LossConfig& lc = model->spec().loss;
  const double sp = lc.scale_prom > 0.0 ? lc.scale_prom : 1.0;
  const double sb = lc.scale_bound > 0.0 ? lc.scale_bound : 1.0;
  out.total = model->HasBoundary()
                  ? lc.alpha * out.prom_mse / sp + (1.0 - lc.alpha) * out.bound_mse / sb
                  : out.prom_mse / sp;
  return out;
}

std::map<std::string, Vector> SnapshotParams(Model* model) {
  std::map<std::string, Vector> snap;
  model->VisitParams([&](const ParamRef& ref) {
    snap[ref.name] = Vector(ref.value, ref.value + ref.size);
  });
  return snap;
}

void RestoreParams(Model* model, const std::map<std::string, Vector>& snap) {
  model->VisitParams([&](const ParamRef& ref) {
    const Vector& v = snap.at(ref.name);
    std::copy(v.begin(), v.end(), ref.value);
  });
}

}  // namespace

Checkpoint Train(Model* model, const std::vector<const Utterance*>& train_set,
                 const std::vector<const Utterance*>& val_set,
                 const FusionContext* fusion, const TrainConfig& cfg) {
  WAVPROM_REQUIRE(!train_set.empty(), "trainer: empty training set");
  WAVPROM_REQUIRE(!val_set.empty(), "trainer: empty validation set");
  WAVPROM_REQUIRE(cfg.learning_rate > 0.0, "trainer: learning_rate must be > 0");
  WAVPROM_REQUIRE(cfg.batch_size >= 1, "trainer: batch_size must be >= 1");
  WAVPROM_REQUIRE(cfg.max_epochs >= 1, "trainer: max_epochs must be >= 1");
  WAVPROM_REQUIRE(cfg.early_stop_patience >= 1, "trainer: patience must be >= 1");

  AdamOptimizer adam(model, cfg.learning_rate);
  Rng shuffle_rng(cfg.seed ^ 0x7368756666ULL);
  Rng dropout_rng(cfg.seed ^ 0x64726f70ULL);
  PassContext train_ctx;
  train_ctx.training = true;
  train_ctx.dropout_rng = &dropout_rng;

  const bool has_bound = model->HasBoundary();
  const double alpha = model->spec().loss.alpha;
  const bool preset_scales =
      model->spec().loss.scale_prom > 0.0 &&
      (!has_bound || model->spec().loss.scale_bound > 0.0);

  Checkpoint best;
  best.seed = cfg.seed;
  EarlyStopping stopper(cfg.early_stop_patience);
  std::map<std::string, Vector> best_params;

  std::vector<int> order(train_set.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  Model::Cache cache;  // per-word buffers recycled across utterances and epochs

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    shuffle_rng.Shuffle(&order);
    double epoch_prom_mse = 0.0, epoch_bound_mse = 0.0, epoch_loss = 0.0;
    int batches = 0;

    for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const size_t end = std::min(order.size(), start + cfg.batch_size);
      int64_t batch_words = 0;
      for (size_t i = start; i < end; ++i)
        batch_words += train_set[order[i]]->NumWords();

      const LossConfig& lc = model->spec().loss;
      const double sp = lc.scale_prom > 0.0 ? lc.scale_prom : 1.0;
      const double sb = lc.scale_bound > 0.0 ? lc.scale_bound : 1.0;

      model->ZeroGrad();
      double prom_sq = 0.0, bound_sq = 0.0;
      for (size_t i = start; i < end; ++i) {
        const Utterance& utt = *train_set[order[i]];
        Model::Output pred = model->Forward(utt, fusion, train_ctx, &cache);

        const int t_total = utt.NumWords();
        Vector dprom(t_total, 0.0), dbound;
        if (has_bound) dbound.assign(t_total, 0.0);
        for (int t = 0; t < t_total; ++t) {
          const double pd = pred.prominence[t] - utt.labels[t].prominence_degree;
          prom_sq += pd * pd;
          dprom[t] = (has_bound ? alpha : 1.0) / sp * 2.0 * pd /
                     static_cast<double>(batch_words);
          if (has_bound) {
            const double bd = pred.boundary[t] - utt.labels[t].boundary_degree;
            bound_sq += bd * bd;
            dbound[t] =
                (1.0 - alpha) / sb * 2.0 * bd / static_cast<double>(batch_words);
          }
        }
        model->Backward(dprom, dbound, &cache);
      }

      const double prom_mse = prom_sq / static_cast<double>(batch_words);
      const double bound_mse =
          has_bound ? bound_sq / static_cast<double>(batch_words) : 0.0;
      const double batch_loss =
          has_bound ? alpha * prom_mse / sp + (1.0 - alpha) * bound_mse / sb
                    : prom_mse / sp;
      if (!std::isfinite(batch_loss))
        ThrowError("trainer: training diverged at epoch ", epoch,
                   " (non-finite loss ", batch_loss, ", prominence MSE ", prom_mse,
                   ")");
      adam.Step();

      epoch_prom_mse += prom_mse;
      epoch_bound_mse += bound_mse;
      epoch_loss += batch_loss;
      ++batches;
    }
    epoch_prom_mse /= batches;
    epoch_bound_mse /= batches;
    epoch_loss /= batches;

    // Range-equalizing loss scales: mean per-task MSE of the first epoch,
    // frozen before its validation pass and kept in the spec snapshot.
    if (epoch == 1 && !preset_scales) {
      LossConfig* lc = &model->mutable_spec()->loss;
      lc->scale_prom = std::max(epoch_prom_mse, 1e-8);
      if (has_bound) lc->scale_bound = std::max(epoch_bound_mse, 1e-8);
    }

    SetLoss val = EvaluateSet(model, val_set, fusion, cfg.monitor_pearson);
    double criterion = val.total;
    if (cfg.monitor_pearson) criterion = -Pearson(val.prom_pred, val.prom_true);
    if (!std::isfinite(criterion))
      ThrowError("trainer: non-finite validation criterion at epoch ", epoch);

    best.history.push_back({epoch, epoch_loss, val.total});
    if (cfg.verbose)
      std::cerr << "epoch " << epoch << " train_loss " << epoch_loss << " val_loss "
                << val.total << "\n";

    if (stopper.Observe(criterion)) {
      best.best_epoch = epoch;
      best.best_val_loss = val.total;
      best_params = SnapshotParams(model);
    } else if (stopper.ShouldStop()) {
      break;
    }
  }

  RestoreParams(model, best_params);
  best.spec = model->spec();
  best.tensors = std::move(best_params);
  if (fusion != nullptr) {
    best.stats_prominence = fusion->stats_prominence;
    best.stats_boundary = fusion->stats_boundary;
  }
  return best;
}

std::vector<Model::Output> PredictSet(Model* model,
                                      const std::vector<const Utterance*>& utterances,
                                      const FusionContext* fusion) {
  PassContext ctx;
  ctx.training = false;
  std::vector<Model::Output> out;
  out.reserve(utterances.size());
  Model::Cache cache;
  for (const Utterance* utt : utterances) {
    out.push_back(model->Forward(*utt, fusion, ctx, &cache));
  }
  return out;
}

std::vector<Model::Output> EnsemblePredict(
    const std::vector<Checkpoint>& checkpoints,
    const std::vector<const Utterance*>& test_set, const FusionSources* sources) {
  WAVPROM_REQUIRE(!checkpoints.empty(), "ensemble: no checkpoints");
  // Loss scales are measured on each model's own training split, so they may
  // differ across an otherwise identical ensemble; neutralize them before
  // comparing architectures.
  auto architecture_of = [](const Checkpoint& ck) {
    ModelSpec s = ck.spec;
    s.loss.scale_prom = 0.0;
    s.loss.scale_bound = 0.0;
    return ModelSpecToJson(s);
  };
  const std::string ref_spec = architecture_of(checkpoints[0]);
  for (size_t i = 1; i < checkpoints.size(); ++i)
    if (architecture_of(checkpoints[i]) != ref_spec)
      ThrowValidation("ensemble: checkpoint ", i,
                      " has a different model spec than checkpoint 0");

  std::vector<Model::Output> sum(test_set.size());
  for (const Checkpoint& ck : checkpoints) {
    auto model = ck.BuildModel();
    FusionContext fusion;
    fusion.sources = sources;
    fusion.stats_prominence = ck.stats_prominence;
    fusion.stats_boundary = ck.stats_boundary;
    auto preds = PredictSet(model.get(),
                            test_set, &fusion);
    for (size_t u = 0; u < preds.size(); ++u) {
      if (sum[u].prominence.empty()) {
        sum[u].prominence.assign(preds[u].prominence.size(), 0.0);
        sum[u].boundary.assign(preds[u].boundary.size(), 0.0);
      }
      for (size_t t = 0; t < preds[u].prominence.size(); ++t)
        sum[u].prominence[t] += preds[u].prominence[t];
      for (size_t t = 0; t < preds[u].boundary.size(); ++t)
        sum[u].boundary[t] += preds[u].boundary[t];
    }
  }
  const double k = static_cast<double>(checkpoints.size());
  for (auto& o : sum) {
    for (double& v : o.prominence) v /= k;
    for (double& v : o.boundary) v /= k;
  }
  return sum;
}

}  // namespace wavprom
