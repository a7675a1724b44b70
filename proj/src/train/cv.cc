// wavprom/train/cv.cc

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

#include "wavprom/train/cv.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "wavprom/base/error.h"
#include "wavprom/base/parallel.h"
#include "wavprom/eval/metrics.h"

namespace wavprom {

namespace {

using nlohmann::json;

uint64_t Fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::vector<const Utterance*> Select(const Corpus& corpus, const FoldPlan& plan,
                                     int fold, bool in_fold) {
  std::vector<const Utterance*> out;
  for (const auto& u : corpus.utterances) {
    const bool member = plan.FoldOf(u.utterance_id) == fold;
    if (member == in_fold) out.push_back(&u);
  }
  return out;
}

std::vector<UtteranceKey> Keys(const std::vector<const Utterance*>& utts) {
  std::vector<UtteranceKey> keys;
  keys.reserve(utts.size());
  for (const Utterance* u : utts)
    keys.push_back({u->utterance_id, u->speaker_id, u->NumWords()});
  return keys;
}

void AuditSpeakerDisjoint(const std::vector<const Utterance*>& train,
                          const std::vector<const Utterance*>& test) {
  std::set<std::string> train_speakers;
  for (const Utterance* u : train) train_speakers.insert(u->speaker_id);
  for (const Utterance* u : test)
    if (train_speakers.count(u->speaker_id))
      ThrowError("protocol violation: speaker '", u->speaker_id,
                 "' appears in both train and test");
}

}  // namespace

std::string HashConfig(const ModelSpec& spec, const TrainConfig& train_cfg,
                       const CvConfig& cv_cfg) {
  std::ostringstream os;
  os << ModelSpecToJson(spec) << "|lr" << train_cfg.learning_rate << "|bs"
     << train_cfg.batch_size << "|ep" << train_cfg.max_epochs << "|pat"
     << train_cfg.early_stop_patience << "|ok" << cv_cfg.outer_folds << "|ik"
     << cv_cfg.inner_folds;
  std::ostringstream hex;
  hex << std::hex << Fnv1a(os.str());
  return hex.str();
}

CvReport RunCv(const Corpus& corpus, const ModelSpec& model_spec,
               const TrainConfig& train_cfg, const CvConfig& cv_cfg,
               const FusionSources* sources,
               std::vector<Checkpoint>* out_checkpoints,
               std::vector<CvPrediction>* out_predictions) {
  WAVPROM_REQUIRE(cv_cfg.outer_folds >= 2, "cv: outer_folds must be >= 2");
  WAVPROM_REQUIRE(cv_cfg.inner_folds >= 2, "cv: inner_folds must be >= 2");

  ModelSpec spec = model_spec;
  spec.max_segment_samples = corpus.max_segment_samples;
  ValidateModelSpec(spec);

  CvReport report;
  report.architecture = VariantName(spec.variant);
  report.seed = cv_cfg.seed;
  report.config_hash = HashConfig(spec, train_cfg, cv_cfg);

  const FoldPlan outer_plan =
      MakeFolds(CorpusKeys(corpus), cv_cfg.outer_folds, cv_cfg.seed,
                cv_cfg.balance_ratio);

  struct Task {
    int outer, inner;
    std::vector<const Utterance*> train, val;
  };
  std::vector<Task> tasks;
  std::vector<std::vector<const Utterance*>> test_sets(cv_cfg.outer_folds);

  for (int f = 0; f < cv_cfg.outer_folds; ++f) {
    test_sets[f] = Select(corpus, outer_plan, f, true);
    auto train_pool = Select(corpus, outer_plan, f, false);
    AuditSpeakerDisjoint(train_pool, test_sets[f]);
    const FoldPlan inner_plan =
        InnerFolds(Keys(train_pool), cv_cfg.inner_folds,
                   cv_cfg.seed + static_cast<uint64_t>(f) + 1, cv_cfg.balance_ratio);
    for (int i = 0; i < cv_cfg.inner_folds; ++i) {
      Task task;
      task.outer = f;
      task.inner = i;
      for (const Utterance* u : train_pool) {
        if (inner_plan.FoldOf(u->utterance_id) == i)
          task.val.push_back(u);
        else
          task.train.push_back(u);
      }
      AuditSpeakerDisjoint(task.train, task.val);
      tasks.push_back(std::move(task));
    }
  }

  std::vector<Checkpoint> checkpoints(tasks.size());
  std::vector<CvModelEntry> entries(tasks.size());
  ParallelFor(static_cast<int>(tasks.size()), cv_cfg.jobs, [&](int idx) {
    const Task& task = tasks[idx];
    const uint64_t model_seed =
        cv_cfg.seed * 1000003ULL + static_cast<uint64_t>(task.outer) * 101ULL +
        static_cast<uint64_t>(task.inner);
    Model model(spec, model_seed);
    FusionContext fusion = BuildFusionContext(sources, spec, task.train);
    TrainConfig cfg = train_cfg;
    cfg.seed = model_seed;
    Checkpoint ck = Train(&model, task.train, task.val, &fusion, cfg);
    entries[idx] = {task.outer, task.inner, ck.best_epoch,
                    static_cast<int>(ck.history.size()), ck.best_val_loss};
    checkpoints[idx] = std::move(ck);
  });
  report.models = entries;

  for (int f = 0; f < cv_cfg.outer_folds; ++f) {
    std::vector<Checkpoint> fold_cks(
        checkpoints.begin() + static_cast<size_t>(f) * cv_cfg.inner_folds,
        checkpoints.begin() + static_cast<size_t>(f + 1) * cv_cfg.inner_folds);
    auto preds = EnsemblePredict(fold_cks, test_sets[f], sources);

    Vector prom_pred, prom_true, bound_pred, bound_true;
    std::set<std::string> speakers;
    for (size_t u = 0; u < test_sets[f].size(); ++u) {
      const Utterance& utt = *test_sets[f][u];
      speakers.insert(utt.speaker_id);
      for (int t = 0; t < utt.NumWords(); ++t) {
        prom_pred.push_back(preds[u].prominence[t]);
        prom_true.push_back(utt.labels[t].prominence_degree);
        if (!preds[u].boundary.empty()) {
          bound_pred.push_back(preds[u].boundary[t]);
          bound_true.push_back(utt.labels[t].boundary_degree);
        }
        if (out_predictions != nullptr) {
          CvPrediction row;
          row.utterance_id = utt.utterance_id;
          row.word_index = t;
          row.token = utt.words[t].token;
          row.fold = f;
          row.prominence_score = preds[u].prominence[t];
          row.boundary_score =
              preds[u].boundary.empty() ? std::numeric_limits<double>::quiet_NaN()
                                        : preds[u].boundary[t];
          row.prominence_degree = utt.labels[t].prominence_degree;
          row.boundary_degree = utt.labels[t].boundary_degree;
          out_predictions->push_back(std::move(row));
        }
      }
    }

    CvFoldResult fr;
    fr.fold = f;
    fr.num_test_words = static_cast<int>(prom_pred.size());
    fr.test_speakers.assign(speakers.begin(), speakers.end());
    fr.pearson_prominence = Pearson(prom_pred, prom_true);
    fr.pearson_boundary = bound_pred.empty()
                              ? std::numeric_limits<double>::quiet_NaN()
                              : Pearson(bound_pred, bound_true);
    report.folds.push_back(std::move(fr));
  }

  Vector rs;
  for (const auto& fr : report.folds) rs.push_back(fr.pearson_prominence);
  auto [mean, sd] = FoldSummary(rs);
  report.mean_r = mean;
  report.sd_r = sd;

  if (out_checkpoints != nullptr) *out_checkpoints = std::move(checkpoints);
  return report;
}

std::string CvReport::ToJson() const {
  json folds_json = json::array();
  for (const auto& f : folds) {
    json fj = {{"fold", f.fold},
               {"pearson_prominence", f.pearson_prominence},
               {"num_test_words", f.num_test_words},
               {"test_speakers", f.test_speakers}};
    if (std::isfinite(f.pearson_boundary))
      fj["pearson_boundary"] = f.pearson_boundary;
    folds_json.push_back(fj);
  }
  json models_json = json::array();
  for (const auto& m : models)
    models_json.push_back({{"outer_fold", m.outer_fold},
                           {"inner_fold", m.inner_fold},
                           {"best_epoch", m.best_epoch},
                           {"epochs_run", m.epochs_run},
                           {"best_val_loss", m.best_val_loss}});
  json j = {
      {"architecture", architecture},
      {"folds", folds_json},
      {"models", models_json},
      {"mean_r", mean_r},
      {"sd_r", sd_r},
      {"seed", seed},
      {"config_hash", config_hash},
  };
  return j.dump(2);
}

std::string CvReport::SummaryTable() const {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(3);
  os << "architecture        | pearson r (mean +/- sd over " << folds.size()
     << " folds)\n";
  os << "--------------------+--------------------------------------\n";
  os << VariantName(VariantFromName(architecture)) << std::string(std::max<size_t>(
            1, 20 - architecture.size()), ' ')
     << "| " << mean_r << " +/- " << sd_r << "\n";
  return os.str();
}

}  // namespace wavprom
