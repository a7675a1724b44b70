// wavprom/tests/fusion-test.cc

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

#include <cmath>
#include <filesystem>
#include <fstream>

#include "wavprom/base/error.h"
#include "wavprom/base/rng.h"
#include "wavprom/fusion/features.h"
#include "wavprom/fusion/lexical.h"
#include "wavprom/mtl/model.h"
#include "wavprom/synth/generator.h"
#include "wavprom/corpus/manifest.h"

using namespace wavprom;
namespace fs = std::filesystem;

TEST_CASE("feature table round trip and validation") {
  fs::path dir = fs::temp_directory_path() / "wavprom-fusion";
  fs::create_directories(dir);
  std::string path = (dir / "feat.csv").string();

  WordFeatureTable table;
  table.dim = 3;
  table.rows[{"u0", 0}] = {1.0, 2.0, 3.0};
  table.rows[{"u0", 1}] = {4.0, 5.0, 6.0};
  WriteFeatureTable(table, path);

  WordFeatureTable back = LoadFeatureTable(path, 3);
  REQUIRE(back.rows.size() == 2);
  CHECK(*back.Find("u0", 1) == Vector({4.0, 5.0, 6.0}));
  CHECK(back.Find("u0", 2) == nullptr);

  // Wrong expected dimension is caught at the header.
  CHECK_THROWS_AS(LoadFeatureTable(path, 4), ValidationError);

  // A short row is caught and names the word.
  std::ofstream out(path, std::ios::app);
  out << "u1,0,1.0,2.0\n";
  out.close();
  CHECK_THROWS_WITH_AS(LoadFeatureTable(path, 3), doctest::Contains("u1"),
                       ValidationError);
}

TEST_CASE("training-fold standardization has zero mean and unit variance") {
  Rng rng(3);
  WordFeatureTable table;
  table.dim = 5;
  std::vector<std::pair<std::string, int>> train_words;
  for (int w = 0; w < 200; ++w) {
    Vector v(5);
    for (int i = 0; i < 5; ++i) v[i] = 3.0 + 10.0 * rng.Gaussian();
    table.rows[{"u0", w}] = v;
    train_words.emplace_back("u0", w);
  }
  FeatureStats stats = ComputeFeatureStats(table, train_words);
  Vector mean(5, 0.0), var(5, 0.0);
  for (const auto& [key, raw] : table.rows) {
    Vector z = Standardize(raw, stats);
    for (int i = 0; i < 5; ++i) mean[i] += z[i];
  }
  for (auto& m : mean) m /= 200.0;
  for (const auto& [key, raw] : table.rows) {
    Vector z = Standardize(raw, stats);
    for (int i = 0; i < 5; ++i) var[i] += (z[i] - mean[i]) * (z[i] - mean[i]);
  }
  for (int i = 0; i < 5; ++i) {
    CHECK(std::fabs(mean[i]) < 1e-9);
    CHECK(std::fabs(var[i] / 200.0 - 1.0) < 1e-9);
  }
}

TEST_CASE("fuse concatenates in fixed recoverable order") {
  Vector cnn = {1.0, 2.0};
  Vector acoustic = {3.0, 4.0, 5.0};
  Vector lexical = {6.0};

  CHECK(FuseWordVector(cnn, nullptr, nullptr) == cnn);
  CHECK(FuseWordVector(cnn, &acoustic, nullptr) ==
        Vector({1.0, 2.0, 3.0, 4.0, 5.0}));
  Vector full = FuseWordVector(cnn, &acoustic, &lexical);
  CHECK(full == Vector({1.0, 2.0, 3.0, 4.0, 5.0, 6.0}));
  // Slices recover the inputs.
  CHECK(Vector(full.begin(), full.begin() + 2) == cnn);
  CHECK(Vector(full.begin() + 2, full.begin() + 5) == acoustic);
  CHECK(Vector(full.begin() + 5, full.end()) == lexical);

  Vector bad = {std::nan("")};
  CHECK_THROWS_AS(FuseWordVector(cnn, &bad, nullptr), ValidationError);
}

TEST_CASE("gru input dimensions: 32, 66, 366") {
  ModelSpec spec = DefaultModelSpec(ArchitectureVariant::kSingle);
  spec.head.gru_layers = 1;
  spec.head.gru_hidden = 4;
  spec.head.fc1_dim = 4;

  Model plain(spec, 1);
  CHECK(plain.ProminenceInputDim() == 32);

  spec.fusion.use_acoustic_features = true;
  Model with_acoustic(spec, 1);
  CHECK(with_acoustic.ProminenceInputDim() == 66);

  spec.fusion.use_lexical = true;
  Model with_all(spec, 1);
  CHECK(with_all.ProminenceInputDim() == 366);
}

TEST_CASE("disabled fusion reproduces the unfused architecture exactly") {
  ModelSpec spec = DefaultModelSpec(ArchitectureVariant::kSingle);
  spec.head.gru_layers = 1;
  spec.head.gru_hidden = 4;
  spec.head.fc1_dim = 4;

  auto param_count = [](Model* m) {
    int64_t n = 0;
    m->VisitParams([&](const ParamRef& ref) { n += ref.size; });
    return n;
  };
  auto has_lex_tensors = [](Model* m) {
    bool found = false;
    m->VisitParams([&](const ParamRef& ref) {
      if (ref.name.find("lex") != std::string::npos) found = true;
    });
    return found;
  };

  Model baseline(spec, 5);
  // Same spec with fusion switched off but lexical dimensions still present
  // in the config: must not grow the model.
  ModelSpec configured = spec;
  configured.fusion.lexical.projection_dim = 300;
  configured.fusion.lexical.dropout = 0.3;
  Model unfused(configured, 5);
  CHECK(param_count(&unfused) == param_count(&baseline));
  CHECK(!has_lex_tensors(&unfused));
  CHECK(unfused.ProminenceInputDim() == 32);

  configured.fusion.use_lexical = true;
  Model fused(configured, 5);
  CHECK(param_count(&fused) > param_count(&baseline));
  CHECK(has_lex_tensors(&fused));
}

TEST_CASE("boundary branch fuses the 27-dim set") {
  ModelSpec spec = DefaultModelSpec(ArchitectureVariant::kSharedCnnHeads);
  spec.head.gru_layers = 1;
  spec.head.gru_hidden = 4;
  spec.head.fc1_dim = 4;
  spec.loss.alpha = 0.95;
  spec.fusion.use_acoustic_features = true;
  Model model(spec, 1);
  CHECK(model.ProminenceInputDim() == 66);
  CHECK(model.BoundaryInputDim() == 32 + 27);
}

TEST_CASE("lexical table lookup, normalization and OOV") {
  fs::path dir = fs::temp_directory_path() / "wavprom-lex";
  fs::create_directories(dir);
  std::string path = (dir / "vectors.txt").string();
  {
    std::ofstream out(path);
    out << "the";
    for (int i = 0; i < 100; ++i) out << " " << 0.01 * i;
    out << "\nCat";
    for (int i = 0; i < 100; ++i) out << " " << 1.0;
    out << "\n";
  }
  LexicalTable table(path, 100);
  CHECK(table.size() == 2);
  CHECK(table.Lookup("the") != nullptr);
  CHECK(table.Lookup("The,") != nullptr);  // punctuation stripped, lowercased
  CHECK(table.Lookup("cat") != nullptr);
  CHECK(table.Lookup("dog") == nullptr);
  CHECK(table.Lookup("the")[5] == doctest::Approx(0.05));
}

TEST_CASE("lexical projector: OOV with zero bias maps to zero") {
  LexicalSpec spec;
  spec.dropout = 0.0;
  Rng init(5);
  LexicalProjector proj(spec, &init);
  proj.VisitParams("", [](const ParamRef& ref) {
    if (ref.name == "b") std::fill(ref.value, ref.value + ref.size, 0.0);
  });
  LexicalTable empty(100);
  PassContext ctx;
  LexicalProjector::Cache cache;
  Matrix out = proj.Forward({"anything"}, empty, ctx, &cache);
  REQUIRE(out.cols == 300);
  for (int c = 0; c < 300; ++c) CHECK(out.At(0, c) == 0.0);
}

TEST_CASE("lexical projector is deterministic in inference mode") {
  fs::path dir = fs::temp_directory_path() / "wavprom-lex2";
  fs::create_directories(dir);
  std::string path = (dir / "vectors.txt").string();
  {
    std::ofstream out(path);
    out << "word";
    for (int i = 0; i < 100; ++i) out << " " << (i % 7) * 0.1;
    out << "\n";
  }
  LexicalTable table(path, 100);
  LexicalSpec spec;
  Rng init(7);
  LexicalProjector proj(spec, &init);
  PassContext ctx;  // inference
  LexicalProjector::Cache c1, c2;
  Matrix a = proj.Forward({"word", "word"}, table, ctx, &c1);
  Matrix b = proj.Forward({"word", "word"}, table, ctx, &c2);
  CHECK(a.d == b.d);
  REQUIRE(a.cols == 300);

  // Dropout varies the projection in training mode.
  Rng drop(9);
  PassContext train{true, &drop};
  LexicalProjector::Cache c3;
  Matrix t = proj.Forward({"word"}, table, train, &c3);
  bool differs = false;
  for (int c = 0; c < 300; ++c)
    if (std::fabs(t.At(0, c) - a.At(0, c)) > 1e-12) differs = true;
  CHECK(differs);
}

TEST_CASE("stand-in extractor covers the corpus at the declared dimension") {
  fs::path dir = fs::temp_directory_path() / "wavprom-standin";
  fs::remove_all(dir);
  SynthConfig cfg;
  cfg.num_speakers = 2;
  cfg.utterances_per_speaker = 1;
  cfg.words_min = 6;
  cfg.words_max = 8;
  cfg.seed = 11;
  GeneratedCorpus gen = GenerateCorpus(cfg, dir.string());
  Corpus corpus = LoadManifest(gen.manifest_path);

  for (int dim : {34, 27}) {
    WordFeatureTable table = ComputeStandinFeatures(corpus, dim);
    CHECK(table.dim == dim);
    ValidateCoverage(table, corpus);
    for (const auto& [key, v] : table.rows) {
      REQUIRE(static_cast<int>(v.size()) == dim);
      for (double x : v) CHECK(std::isfinite(x));
    }
  }
  CHECK_THROWS_AS(ComputeStandinFeatures(corpus, 12), ValidationError);
}

TEST_CASE("coverage validation reports the missing word") {
  Corpus corpus;
  Utterance utt;
  utt.utterance_id = "u9";
  utt.speaker_id = "s";
  utt.words.resize(2);
  utt.labels.resize(2);
  corpus.utterances.push_back(utt);
  WordFeatureTable table;
  table.dim = 2;
  table.rows[{"u9", 0}] = {0.0, 0.0};
  CHECK_THROWS_WITH_AS(ValidateCoverage(table, corpus), doctest::Contains("u9"),
                       ValidationError);
}
