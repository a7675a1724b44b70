// wavprom/tools/main.cc

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

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "wavprom/base/error.h"
#include "wavprom/corpus/manifest.h"
#include "wavprom/fusion/features.h"
#include "wavprom/synth/generator.h"
#include "wavprom/train/cv.h"
#include "wavprom/train/trainer.h"

namespace fs = std::filesystem;
using namespace wavprom;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct CorpusOptions {
  std::string manifest;
  int max_samples = 0;  // 0 = corpus maximum
  bool normalize = false;
};

struct ModelOptions {
  std::string architecture = "SINGLE";
  std::string first_layer = "sinc";
  int sinc_width = 31;
  int sinc_stride = 2;
  int conv_layers = 4;
  int filters = 32;
  int conv_width = 51;
  int conv_stride = 1;
  int pool = 3;
  int gru_layers = 3;
  int gru_hidden = 256;
  double gru_dropout = 0.5;
  int fc1 = 128;
  double fc1_dropout = 0.5;
  double alpha = -1.0;  // -1 = default for the variant (1 single, 0.95 MTL)
  bool condition_detach = false;
  bool use_acoustic = false;
  bool use_lexical = false;
  int lexical_dim = 100;
  int projection_dim = 300;
  double lexical_dropout = 0.3;
};

struct FusionOptions {
  std::string acoustic_prominence;  // 34-dim CSV
  std::string acoustic_boundary;    // 27-dim CSV
  std::string embeddings;
  bool standin = false;  // compute built-in features from the waveforms
};

struct TrainOptions {
  double lr = 0.001;
  int batch = 64;
  int epochs = 200;
  int patience = 12;
  uint64_t seed = 1;
  bool monitor_pearson = false;
  int val_folds = 4;
  bool verbose = false;
};

struct CvOptions {
  int outer = 3;
  int inner = 4;
  double balance_ratio = 1.3;
};

void AddCorpusOptions(CLI::App* cmd, CorpusOptions* o) {
  cmd->add_option("--corpus.manifest", o->manifest, "JSON-lines manifest path")
      ->required();
  cmd->add_option("--corpus.max-samples", o->max_samples,
                  "Fixed segment length in samples; 0 = corpus maximum");
  cmd->add_flag("--corpus.normalize", o->normalize,
                "Per-segment peak amplitude normalization");
}

void AddModelOptions(CLI::App* cmd, ModelOptions* o) {
  cmd->add_option("--model.architecture", o->architecture,
                  "SINGLE, SHARED_CNN_HEADS, COND_A, COND_B or COND_SHARED_SINC");
  cmd->add_option("--model.first-layer", o->first_layer, "sinc or standard");
  cmd->add_option("--model.sinc-width", o->sinc_width, "First-layer kernel width");
  cmd->add_option("--model.sinc-stride", o->sinc_stride, "First-layer stride");
  cmd->add_option("--model.conv-layers", o->conv_layers, "Total conv layers");
  cmd->add_option("--model.filters", o->filters, "Filters per conv layer");
  cmd->add_option("--model.conv-width", o->conv_width, "Kernel width, layers 2+");
  cmd->add_option("--model.conv-stride", o->conv_stride, "Stride, layers 2+");
  cmd->add_option("--model.pool", o->pool, "Max-pool width per layer");
  cmd->add_option("--model.gru-layers", o->gru_layers, "GRU layers");
  cmd->add_option("--model.gru-hidden", o->gru_hidden, "GRU width per direction");
  cmd->add_option("--model.gru-dropout", o->gru_dropout, "Inter-layer GRU dropout");
  cmd->add_option("--model.fc1", o->fc1, "First dense layer width");
  cmd->add_option("--model.fc1-dropout", o->fc1_dropout, "Dense layer dropout");
  cmd->add_option("--model.alpha", o->alpha,
                  "Prominence/boundary loss trade-off; -1 = variant default");
  cmd->add_flag("--model.condition-detach", o->condition_detach,
                "Block gradients through the conditioning score");
  cmd->add_flag("--model.use-acoustic", o->use_acoustic,
                "Fuse word-level acoustic feature vectors");
  cmd->add_flag("--model.use-lexical", o->use_lexical,
                "Fuse projected word embeddings");
  cmd->add_option("--model.lexical-dim", o->lexical_dim, "Embedding dimension");
  cmd->add_option("--model.projection-dim", o->projection_dim,
                  "Lexical projection dimension");
  cmd->add_option("--model.lexical-dropout", o->lexical_dropout,
                  "Dropout on the embedding input");
}

void AddFusionOptions(CLI::App* cmd, FusionOptions* o) {
  cmd->add_option("--fusion.acoustic-prominence", o->acoustic_prominence,
                  "34-dim feature CSV for the prominence branch");
  cmd->add_option("--fusion.acoustic-boundary", o->acoustic_boundary,
                  "27-dim feature CSV for the boundary branch");
  cmd->add_option("--fusion.embeddings", o->embeddings,
                  "Pretrained word vectors (token + reals per line)");
  cmd->add_flag("--fusion.standin", o->standin,
                "Compute built-in waveform features instead of loading CSVs");
}

void AddTrainOptions(CLI::App* cmd, TrainOptions* o) {
  cmd->add_option("--train.lr", o->lr, "Adam learning rate");
  cmd->add_option("--train.batch", o->batch, "Utterances per step");
  cmd->add_option("--train.epochs", o->epochs, "Epoch cap");
  cmd->add_option("--train.patience", o->patience, "Early-stopping patience");
  cmd->add_option("--train.seed", o->seed, "Random seed");
  cmd->add_flag("--train.monitor-pearson", o->monitor_pearson,
                "Early-stop on validation Pearson instead of loss");
  cmd->add_option("--train.val-folds", o->val_folds,
                  "Speaker-disjoint split count for the held-out validation fold");
  cmd->add_flag("--train.verbose", o->verbose, "Per-epoch logging");
}

ModelSpec BuildModelSpec(const ModelOptions& o) {
  ModelSpec spec;
  spec.variant = VariantFromName(o.architecture);
  if (o.first_layer == "sinc")
    spec.frontend.first_layer = FirstLayerKind::kSinc;
  else if (o.first_layer == "standard")
    spec.frontend.first_layer = FirstLayerKind::kStandard;
  else
    ThrowValidation("model.first-layer must be 'sinc' or 'standard', got '",
                    o.first_layer, "'");
  spec.frontend.layers.clear();
  spec.frontend.layers.push_back({o.filters, o.sinc_width, o.sinc_stride, o.pool});
  for (int i = 1; i < o.conv_layers; ++i)
    spec.frontend.layers.push_back({o.filters, o.conv_width, o.conv_stride, o.pool});
  spec.head.gru_layers = o.gru_layers;
  spec.head.gru_hidden = o.gru_hidden;
  spec.head.inter_layer_dropout = o.gru_dropout;
  spec.head.fc1_dim = o.fc1;
  spec.head.fc1_dropout = o.fc1_dropout;
  spec.loss.alpha =
      o.alpha >= 0.0 ? o.alpha
                     : (spec.variant == ArchitectureVariant::kSingle ? 1.0 : 0.95);
  spec.condition_detach = o.condition_detach;
  spec.fusion.use_acoustic_features = o.use_acoustic;
  spec.fusion.use_lexical = o.use_lexical;
  spec.fusion.lexical.embedding_dim = o.lexical_dim;
  spec.fusion.lexical.projection_dim = o.projection_dim;
  spec.fusion.lexical.dropout = o.lexical_dropout;
  ValidateModelSpec(spec);
  return spec;
}

// Loaded fusion inputs; keeps ownership alongside the pointer view.
struct FusionData {
  WordFeatureTable acoustic_prom, acoustic_bound;
  std::unique_ptr<LexicalTable> lexical;
  FusionSources sources;
  bool any = false;
};

FusionData LoadFusion(const FusionOptions& o, const ModelSpec& spec,
                      const Corpus& corpus) {
  FusionData data;
  if (spec.fusion.use_acoustic_features) {
    if (o.standin) {
      data.acoustic_prom =
          ComputeStandinFeatures(corpus, spec.fusion.acoustic_dim_prominence);
      data.acoustic_bound =
          ComputeStandinFeatures(corpus, spec.fusion.acoustic_dim_boundary);
    } else {
      if (o.acoustic_prominence.empty())
        ThrowValidation(
            "model.use-acoustic requires fusion.acoustic-prominence or "
            "fusion.standin");
      data.acoustic_prom = LoadFeatureTable(o.acoustic_prominence,
                                            spec.fusion.acoustic_dim_prominence);
      if (!o.acoustic_boundary.empty())
        data.acoustic_bound =
            LoadFeatureTable(o.acoustic_boundary, spec.fusion.acoustic_dim_boundary);
    }
    ValidateCoverage(data.acoustic_prom, corpus);
    data.sources.acoustic_prominence = &data.acoustic_prom;
    if (data.acoustic_bound.dim > 0) {
      ValidateCoverage(data.acoustic_bound, corpus);
      data.sources.acoustic_boundary = &data.acoustic_bound;
    }
    data.any = true;
  }
  if (spec.fusion.use_lexical) {
    if (o.embeddings.empty())
      ThrowValidation("model.use-lexical requires fusion.embeddings");
    data.lexical = std::make_unique<LexicalTable>(o.embeddings,
                                                  spec.fusion.lexical.embedding_dim);
    data.sources.lexical = data.lexical.get();
    data.any = true;
  }
  return data;
}

// The run directory gets a snapshot of how it was produced: the config file
// contents (when one was given) and the exact command line.
struct Invocation {
  std::string config_path;
  std::vector<std::string> argv;
};

void PrepareRunDir(const std::string& out_dir, const Invocation& invocation) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec)
    ThrowValidation("cannot create run directory ", out_dir, ": ", ec.message());
  std::ofstream snap(fs::path(out_dir) / "config-snapshot.ini");
  snap << "# command:";
  for (const auto& a : invocation.argv) snap << " " << a;
  snap << "\n";
  if (!invocation.config_path.empty()) {
    std::ifstream cfg(invocation.config_path);
    snap << "# config file: " << invocation.config_path << "\n" << cfg.rdbuf();
  }
}

std::string Layer1Label(const ModelSpec& spec) {
  const auto& l = spec.frontend.layers[0];
  return StrCat(spec.frontend.first_layer == FirstLayerKind::kSinc ? "Sinc"
                                                                   : "Standard",
                ", ", l.kernel_width, ", ", l.stride);
}

std::string InputLabel(const ModelSpec& spec) {
  std::string label;
  if (spec.fusion.use_acoustic_features)
    label += "A" + std::to_string(spec.fusion.acoustic_dim_prominence) + " + ";
  label += "Wav";
  if (spec.fusion.use_lexical) label += " + Lex";
  return label;
}

void WritePredictionsCsv(const std::string& path,
                         const std::vector<const Utterance*>& utterances,
                         const std::vector<Model::Output>& preds,
                         bool has_boundary) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) ThrowError("cannot write ", path);
  out << "utterance_id,word_index,token,prominence_score";
  if (has_boundary) out << ",boundary_score";
  out << "\n";
  out.precision(8);
  for (size_t u = 0; u < utterances.size(); ++u) {
    const Utterance& utt = *utterances[u];
    for (int t = 0; t < utt.NumWords(); ++t) {
      out << utt.utterance_id << "," << t << "," << utt.words[t].token << ","
          << preds[u].prominence[t];
      if (has_boundary) out << "," << preds[u].boundary[t];
      out << "\n";
    }
  }
}

// Expands an INI-style config file ([section] + key = value) into
// "--section.key=value" tokens. The tokens are spliced in ahead of the
// explicit command-line arguments, so with take-last semantics flags given on
// the command line win over file values.
std::vector<std::string> LoadConfigArgs(const std::string& path) {
  std::ifstream in(path);
  if (!in) ThrowValidation("cannot open config file: ", path);
  std::vector<std::string> args;
  std::string line, section;
  int line_no = 0;
  auto trim = [](std::string s) {
    size_t a = s.find_first_not_of(" \t\r");
    size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        ThrowValidation(path, " line ", line_no, ": unterminated section header");
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    size_t eq = t.find('=');
    if (eq == std::string::npos)
      ThrowValidation(path, " line ", line_no, ": expected key = value");
    std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    if (key.empty()) ThrowValidation(path, " line ", line_no, ": empty key");
    std::string name = section.empty() ? key : section + "." + key;
    args.push_back("--" + name + "=" + value);
  }
  return args;
}

int RunSynth(const SynthConfig& cfg, const std::string& out_dir) {
  GeneratedCorpus gen = GenerateCorpus(cfg, out_dir);
  std::cout << "synthetic corpus: " << gen.num_utterances << " utterances, "
            << gen.num_words << " words\n"
            << "manifest: " << gen.manifest_path << "\n"
            << "oracle:   " << gen.oracle_path << "\n";
  return kExitOk;
}

int RunTrain(const CorpusOptions& corpus_opt, const ModelOptions& model_opt,
             const FusionOptions& fusion_opt, const TrainOptions& train_opt,
             const std::string& out_dir, const Invocation& invocation) {
  PrepareRunDir(out_dir, invocation);
  ManifestOptions mopt;
  mopt.max_segment_samples = corpus_opt.max_samples;
  mopt.normalize_amplitude = corpus_opt.normalize;
  Corpus corpus = LoadManifest(corpus_opt.manifest, mopt);
  if (corpus.utterances.empty()) ThrowValidation("corpus is empty");

  ModelSpec spec = BuildModelSpec(model_opt);
  spec.max_segment_samples = corpus.max_segment_samples;
  FusionData fusion = LoadFusion(fusion_opt, spec, corpus);

  // Hold out one speaker-disjoint fold for early stopping. Word-count balance
  // is relaxed here: this split feeds early stopping, not the evaluation
  // protocol, and small speaker counts cannot always balance.
  FoldPlan plan = MakeFolds(CorpusKeys(corpus), train_opt.val_folds, train_opt.seed,
                            /*balance_ratio=*/10.0);
  std::vector<const Utterance*> train_set, val_set;
  for (const auto& u : corpus.utterances)
    (plan.FoldOf(u.utterance_id) == 0 ? val_set : train_set).push_back(&u);

  TrainConfig cfg;
  cfg.learning_rate = train_opt.lr;
  cfg.batch_size = train_opt.batch;
  cfg.max_epochs = train_opt.epochs;
  cfg.early_stop_patience = train_opt.patience;
  cfg.seed = train_opt.seed;
  cfg.monitor_pearson = train_opt.monitor_pearson;
  cfg.verbose = train_opt.verbose;

  Model model(spec, train_opt.seed);
  FusionContext fusion_ctx =
      BuildFusionContext(fusion.any ? &fusion.sources : nullptr, spec, train_set);
  Checkpoint ck =
      Train(&model, train_set, val_set, fusion.any ? &fusion_ctx : nullptr, cfg);
  std::string ck_path = (fs::path(out_dir) / "checkpoint.wpck").string();
  ck.Save(ck_path);

  std::cout << "trained " << VariantName(spec.variant) << " [" << InputLabel(spec)
            << ", layer 1: " << Layer1Label(spec) << "]\n"
            << "best epoch " << ck.best_epoch << " of " << ck.history.size()
            << ", validation loss " << ck.best_val_loss << "\n"
            << "checkpoint: " << ck_path << "\n";
  return kExitOk;
}

int RunCvCommand(const CorpusOptions& corpus_opt, const ModelOptions& model_opt,
                 const FusionOptions& fusion_opt, const TrainOptions& train_opt,
                 const CvOptions& cv_opt, int jobs, const std::string& out_dir,
                 const Invocation& invocation) {
  PrepareRunDir(out_dir, invocation);
  ManifestOptions mopt;
  mopt.max_segment_samples = corpus_opt.max_samples;
  mopt.normalize_amplitude = corpus_opt.normalize;
  mopt.jobs = jobs;
  Corpus corpus = LoadManifest(corpus_opt.manifest, mopt);
  if (corpus.utterances.empty()) ThrowValidation("corpus is empty");

  ModelSpec spec = BuildModelSpec(model_opt);
  spec.max_segment_samples = corpus.max_segment_samples;
  FusionData fusion = LoadFusion(fusion_opt, spec, corpus);

  TrainConfig tcfg;
  tcfg.learning_rate = train_opt.lr;
  tcfg.batch_size = train_opt.batch;
  tcfg.max_epochs = train_opt.epochs;
  tcfg.early_stop_patience = train_opt.patience;
  tcfg.seed = train_opt.seed;
  tcfg.monitor_pearson = train_opt.monitor_pearson;
  tcfg.verbose = train_opt.verbose;

  CvConfig cvcfg;
  cvcfg.outer_folds = cv_opt.outer;
  cvcfg.inner_folds = cv_opt.inner;
  cvcfg.balance_ratio = cv_opt.balance_ratio;
  cvcfg.seed = train_opt.seed;
  cvcfg.jobs = jobs;

  std::vector<Checkpoint> checkpoints;
  std::vector<CvPrediction> rows;
  CvReport report = RunCv(corpus, spec, tcfg, cvcfg,
                          fusion.any ? &fusion.sources : nullptr, &checkpoints,
                          &rows);

  for (size_t i = 0; i < checkpoints.size(); ++i) {
    const auto& entry = report.models[i];
    checkpoints[i].Save(
        (fs::path(out_dir) / StrCat("checkpoint-o", entry.outer_fold, "-i",
                                    entry.inner_fold, ".wpck"))
            .string());
  }
  {
    std::ofstream rep(fs::path(out_dir) / "report.json");
    rep << report.ToJson() << "\n";
  }
  {
    std::ofstream csv(fs::path(out_dir) / "predictions.csv");
    csv << "utterance_id,word_index,token,fold,prominence_score,"
           "prominence_degree,boundary_score,boundary_degree\n";
    csv.precision(8);
    for (const auto& r : rows) {
      csv << r.utterance_id << "," << r.word_index << "," << r.token << ","
          << r.fold << "," << r.prominence_score << "," << r.prominence_degree
          << ",";
      if (std::isfinite(r.boundary_score)) csv << r.boundary_score;
      csv << "," << r.boundary_degree << "\n";
    }
  }

  std::cout << "input: " << InputLabel(spec)
            << " | model: CRNN | layer 1: " << Layer1Label(spec) << "\n"
            << report.SummaryTable();
  for (const auto& f : report.folds) {
    std::cout << "  fold " << f.fold << ": r = " << f.pearson_prominence << " ("
              << f.num_test_words << " words)";
    if (std::isfinite(f.pearson_boundary))
      std::cout << ", boundary r = " << f.pearson_boundary;
    std::cout << "\n";
  }
  std::cout << "report: " << (fs::path(out_dir) / "report.json").string() << "\n";
  return kExitOk;
}

int RunPredict(const std::string& checkpoint_path, const CorpusOptions& corpus_opt,
               const FusionOptions& fusion_opt, const std::string& out_csv) {
  Checkpoint ck = Checkpoint::Load(checkpoint_path);
  ManifestOptions mopt;
  // Prediction must match the training-time segment length exactly.
  mopt.max_segment_samples = ck.spec.max_segment_samples;
  mopt.normalize_amplitude = corpus_opt.normalize;
  Corpus corpus = LoadManifest(corpus_opt.manifest, mopt);
  if (corpus.utterances.empty()) ThrowValidation("corpus is empty");

  FusionData fusion = LoadFusion(fusion_opt, ck.spec, corpus);
  FusionContext fusion_ctx;
  fusion_ctx.sources = &fusion.sources;
  fusion_ctx.stats_prominence = ck.stats_prominence;
  fusion_ctx.stats_boundary = ck.stats_boundary;

  auto model = ck.BuildModel();
  std::vector<const Utterance*> utts;
  for (const auto& u : corpus.utterances) utts.push_back(&u);
  auto preds = PredictSet(model.get(), utts, fusion.any ? &fusion_ctx : nullptr);
  WritePredictionsCsv(out_csv, utts, preds, model->HasBoundary());
  std::cout << "wrote " << corpus.TotalWords() << " rows to " << out_csv << "\n";
  return kExitOk;
}

int RunInspectFilters(const std::string& checkpoint_path,
                      const std::string& baseline_path, const std::string& out_csv,
                      int bins) {
  std::ofstream out(out_csv, std::ios::trunc);
  if (!out) ThrowError("cannot write ", out_csv);
  out << "stage,filter,f1_hz,f2_hz";
  for (int b = 0; b < bins; ++b) out << ",mag_" << b;
  out << "\n";
  out.precision(8);

  auto dump = [&](const std::string& stage, const std::string& path) {
    Checkpoint ck = Checkpoint::Load(path);
    auto model = ck.BuildModel();
    SincConv* sinc = model->SincLayer();
    if (sinc == nullptr) ThrowValidation("checkpoint has no sinc layer: ", path);
    const auto& params = sinc->params();
    Matrix kernels = BuildSincKernels(params);
    const double sr = model->spec().frontend.sample_rate_hz;
    for (int f = 0; f < params.num_filters; ++f) {
      double f1, f2;
      EffectiveCutoffs(params, f, &f1, &f2);
      Vector mag =
          KernelMagnitudeResponse(kernels.Row(f), params.kernel_width, bins);
      out << stage << "," << f << "," << f1 * sr << "," << f2 * sr;
      for (double m : mag) out << "," << m;
      out << "\n";
    }
    return params.num_filters;
  };

  int n = dump("current", checkpoint_path);
  if (!baseline_path.empty()) dump("baseline", baseline_path);
  std::cout << "wrote " << n << " filters to " << out_csv << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Word prominence detection from speech waveforms"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  int jobs = 1;

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled corpus");
  SynthConfig synth_cfg;
  std::string synth_out;
  synth->add_option("--out", synth_out, "Output directory")->required();
  synth->add_option("--synth.speakers", synth_cfg.num_speakers, "Speakers");
  synth->add_option("--synth.utterances", synth_cfg.utterances_per_speaker,
                    "Utterances per speaker");
  synth->add_option("--synth.words-min", synth_cfg.words_min, "Min words");
  synth->add_option("--synth.words-max", synth_cfg.words_max, "Max words");
  synth->add_option("--synth.noise", synth_cfg.noise_level, "Additive noise level");
  synth->add_option("--synth.seed", synth_cfg.seed, "Generation seed");
  synth->add_option("--synth.duration-min", synth_cfg.duration_min_ms,
                    "Min word duration (ms)");
  synth->add_option("--synth.duration-max", synth_cfg.duration_max_ms,
                    "Max word duration (ms)");
  synth->add_option("--synth.f0-min", synth_cfg.base_f0_min_hz, "Min base F0 (Hz)");
  synth->add_option("--synth.f0-max", synth_cfg.base_f0_max_hz, "Max base F0 (Hz)");
  synth->add_option("--synth.amp-min", synth_cfg.amplitude_min, "Min word amplitude");
  synth->add_option("--synth.amp-max", synth_cfg.amplitude_max, "Max word amplitude");
  synth->add_option("--synth.excursion-min", synth_cfg.excursion_min,
                    "Min F0 excursion fraction");
  synth->add_option("--synth.excursion-max", synth_cfg.excursion_max,
                    "Max F0 excursion fraction");
  synth->add_option("--synth.pause-min", synth_cfg.pause_min_ms,
                    "Min ordinary pause (ms)");
  synth->add_option("--synth.pause-max", synth_cfg.pause_max_ms,
                    "Max ordinary pause (ms)");
  synth->add_option("--synth.boundary-pause-min", synth_cfg.boundary_pause_min_ms,
                    "Min phrase-boundary pause (ms)");
  synth->add_option("--synth.boundary-pause-max", synth_cfg.boundary_pause_max_ms,
                    "Max phrase-boundary pause (ms)");
  synth->add_option("--synth.boundary-prob", synth_cfg.boundary_prob,
                    "Phrase-boundary probability per word");
  synth->add_option("--synth.loading", synth_cfg.latent_loading,
                    "Shared-latent coupling of duration/amplitude/excursion");
  synth->add_option("--synth.lengthening", synth_cfg.boundary_lengthening,
                    "Pre-boundary duration multiplier");
  synth->add_option("--jobs", jobs, "Parallel workers for utterance generation");

  // train
  auto* train = app.add_subcommand("train", "Train one model with early stopping");
  CorpusOptions train_corpus;
  ModelOptions train_model;
  FusionOptions train_fusion;
  TrainOptions train_train;
  std::string train_out = "run";
  AddCorpusOptions(train, &train_corpus);
  AddModelOptions(train, &train_model);
  AddFusionOptions(train, &train_fusion);
  AddTrainOptions(train, &train_train);
  train->add_option("--out", train_out, "Run directory")->capture_default_str();

  // cv
  auto* cv = app.add_subcommand(
      "cv", "Speaker-independent nested cross-validation with ensembling");
  CorpusOptions cv_corpus;
  ModelOptions cv_model;
  FusionOptions cv_fusion;
  TrainOptions cv_train;
  CvOptions cv_cv;
  std::string cv_out = "run";
  AddCorpusOptions(cv, &cv_corpus);
  AddModelOptions(cv, &cv_model);
  AddFusionOptions(cv, &cv_fusion);
  AddTrainOptions(cv, &cv_train);
  cv->add_option("--cv.outer", cv_cv.outer, "Outer (test) folds");
  cv->add_option("--cv.inner", cv_cv.inner, "Inner (validation) folds");
  cv->add_option("--cv.balance-ratio", cv_cv.balance_ratio,
                 "Max/min fold word-count ratio");
  cv->add_option("--out", cv_out, "Run directory")->capture_default_str();
  cv->add_option("--jobs", jobs, "Parallel workers for independent trainings");

  // predict
  auto* predict = app.add_subcommand("predict", "Score a corpus with a checkpoint");
  CorpusOptions pred_corpus;
  FusionOptions pred_fusion;
  std::string pred_checkpoint, pred_out = "predictions.csv";
  predict->add_option("--checkpoint", pred_checkpoint, "Checkpoint path")
      ->required();
  AddCorpusOptions(predict, &pred_corpus);
  AddFusionOptions(predict, &pred_fusion);
  predict->add_option("--out", pred_out, "Output CSV")->capture_default_str();

  // inspect-filters
  auto* inspect = app.add_subcommand(
      "inspect-filters", "Export learned band-pass cutoffs and responses");
  std::string ins_checkpoint, ins_baseline, ins_out = "filters.csv";
  int ins_bins = 129;
  inspect->add_option("--checkpoint", ins_checkpoint, "Checkpoint path")->required();
  inspect->add_option("--baseline", ins_baseline,
                      "Optional second checkpoint (before/after comparison)");
  inspect->add_option("--out", ins_out, "Output CSV")->capture_default_str();
  inspect->add_option("--bins", ins_bins, "Magnitude response samples");

  std::string config_placeholder;
  for (CLI::App* sub : {synth, train, cv, predict, inspect})
    sub->add_option("--config", config_placeholder,
                    "INI config file; [section] + key map to --section.key; "
                    "command-line flags win");

  // Pre-pass: expand --config <file> into --section.key=value tokens placed
  // right after the subcommand, so explicit flags (parsed later, take-last)
  // override file values.
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  std::vector<std::string> rest;
  for (size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) {
        std::cerr << "error: --config requires a path\n";
        return kExitUsage;
      }
      config_path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
    } else {
      rest.push_back(args[i]);
    }
  }
  std::vector<std::string> final_args;
  try {
    if (!config_path.empty()) {
      if (rest.empty()) ThrowValidation("--config requires a subcommand");
      std::vector<std::string> expanded = LoadConfigArgs(config_path);
      final_args.push_back(rest[0]);
      final_args.insert(final_args.end(), expanded.begin(), expanded.end());
      final_args.insert(final_args.end(), rest.begin() + 1, rest.end());
    } else {
      final_args = rest;
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    std::reverse(final_args.begin(), final_args.end());
    app.parse(final_args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (synth->parsed()) return RunSynth(synth_cfg, synth_out);
    Invocation invocation{config_path, std::vector<std::string>(argv, argv + argc)};
    if (train->parsed())
      return RunTrain(train_corpus, train_model, train_fusion, train_train,
                      train_out, invocation);
    if (cv->parsed())
      return RunCvCommand(cv_corpus, cv_model, cv_fusion, cv_train, cv_cv, jobs,
                          cv_out, invocation);
    if (predict->parsed())
      return RunPredict(pred_checkpoint, pred_corpus, pred_fusion, pred_out);
    if (inspect->parsed())
      return RunInspectFilters(ins_checkpoint, ins_baseline, ins_out, ins_bins);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
