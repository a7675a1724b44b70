// wavprom/tests/mtl-test.cc

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

#include "wavprom/base/error.h"
#include "wavprom/base/rng.h"
#include "wavprom/mtl/model.h"

using namespace wavprom;

namespace {

ModelSpec TinyModelSpec(ArchitectureVariant variant) {
  ModelSpec spec;
  spec.variant = variant;
  spec.frontend.first_layer = FirstLayerKind::kSinc;
  spec.frontend.layers = {{4, 31, 2, 2}, {4, 5, 1, 2}};
  spec.head.gru_layers = 1;
  spec.head.gru_hidden = 5;
  spec.head.inter_layer_dropout = 0.0;
  spec.head.fc1_dim = 4;
  spec.head.fc1_dropout = 0.0;
  spec.max_segment_samples = 400;
  spec.loss.alpha = variant == ArchitectureVariant::kSingle ? 1.0 : 0.95;
  return spec;
}

Utterance MakeUtterance(int words, int seg_len, uint64_t seed) {
  Rng rng(seed);
  Utterance utt;
  utt.utterance_id = StrCat("u", seed);
  utt.speaker_id = "s0";
  for (int w = 0; w < words; ++w) {
    WordSegment seg;
    seg.samples.resize(seg_len);
    for (auto& s : seg.samples) s = rng.Uniform(-0.8, 0.8);
    seg.token = StrCat("w", w);
    utt.words.push_back(std::move(seg));
    utt.labels.push_back(
        AggregateVotes({static_cast<int>(rng.UniformInt(0, 7)),
                        static_cast<int>(rng.UniformInt(0, 7)), 7}));
  }
  return utt;
}

const std::vector<ArchitectureVariant> kAllVariants = {
    ArchitectureVariant::kSingle, ArchitectureVariant::kSharedCnnHeads,
    ArchitectureVariant::kCondA, ArchitectureVariant::kCondB,
    ArchitectureVariant::kCondSharedSinc};

double MaxAbsGrad(Model* model, const std::string& prefix) {
  double worst = 0.0;
  bool found = false;
  model->VisitParams([&](const ParamRef& ref) {
    if (ref.grad == nullptr) return;
    if (ref.name.rfind(prefix, 0) != 0) return;
    found = true;
    for (int64_t i = 0; i < ref.size; ++i)
      worst = std::max(worst, std::fabs(ref.grad[i]));
  });
  REQUIRE(found);
  return worst;
}

}  // namespace

TEST_CASE("variant names round-trip") {
  for (auto v : kAllVariants) CHECK(VariantFromName(VariantName(v)) == v);
  CHECK_THROWS_AS(VariantFromName("NOPE"), ValidationError);
}

TEST_CASE("model spec json round-trip") {
  ModelSpec spec = TinyModelSpec(ArchitectureVariant::kCondB);
  spec.fusion.use_acoustic_features = true;
  spec.fusion.use_lexical = true;
  spec.condition_detach = true;
  ModelSpec back = ModelSpecFromJson(ModelSpecToJson(spec));
  CHECK(ModelSpecToJson(back) == ModelSpecToJson(spec));
  CHECK(back.variant == spec.variant);
  CHECK(back.frontend.layers.size() == spec.frontend.layers.size());
  CHECK(back.condition_detach);
}

TEST_CASE("spec validation enforces the structural invariants") {
  ModelSpec bad = TinyModelSpec(ArchitectureVariant::kSingle);
  bad.loss.alpha = 0.5;  // SINGLE forces alpha = 1
  CHECK_THROWS_AS(ValidateModelSpec(bad), ValidationError);

  bad = TinyModelSpec(ArchitectureVariant::kCondA);
  bad.loss.alpha = 1.5;
  CHECK_THROWS_AS(ValidateModelSpec(bad), ValidationError);

  bad = TinyModelSpec(ArchitectureVariant::kCondSharedSinc);
  bad.frontend.first_layer = FirstLayerKind::kStandard;
  CHECK_THROWS_AS(ValidateModelSpec(bad), ValidationError);
}

TEST_CASE("per-word score count equals word count for all five variants") {
  Utterance utt = MakeUtterance(5, 400, 7);
  PassContext ctx;
  for (auto v : kAllVariants) {
    Model model(TinyModelSpec(v), 42);
    Model::Cache cache;
    Model::Output out = model.Forward(utt, nullptr, ctx, &cache);
    REQUIRE(out.prominence.size() == 5);
    for (double s : out.prominence) {
      CHECK(s > 0.0);
      CHECK(s < 1.0);
    }
    if (v == ArchitectureVariant::kSingle) {
      CHECK(out.boundary.empty());
    } else {
      REQUIRE(out.boundary.size() == 5);
    }
  }
}

TEST_CASE("shared-frontend variants alias one frontend object") {
  Model shared(TinyModelSpec(ArchitectureVariant::kSharedCnnHeads), 1);
  CHECK(shared.prominence_frontend() == shared.boundary_frontend());
  Model cond_b(TinyModelSpec(ArchitectureVariant::kCondB), 1);
  CHECK(cond_b.prominence_frontend() == cond_b.boundary_frontend());
  Model cond_a(TinyModelSpec(ArchitectureVariant::kCondA), 1);
  CHECK(cond_a.prominence_frontend() != cond_a.boundary_frontend());
}

TEST_CASE("shared-sinc variant shares only the first block") {
  Model model(TinyModelSpec(ArchitectureVariant::kCondSharedSinc), 3);
  Frontend* fp = model.prominence_frontend();
  Frontend* fb = model.boundary_frontend();
  CHECK(fp != fb);
  CHECK(fp->block(0).get() == fb->block(0).get());
  CHECK(fp->block(1).get() != fb->block(1).get());
  // Parameter visitation reports the shared sinc tensors once.
  int sinc_tensors = 0;
  model.VisitParams([&](const ParamRef& ref) {
    if (ref.name.find("sinc.f_low") != std::string::npos) ++sinc_tensors;
  });
  CHECK(sinc_tensors == 1);
}

TEST_CASE("conditioning path is live; plain sharing is not") {
  Utterance utt = MakeUtterance(4, 400, 11);
  PassContext ctx;

  for (auto v : {ArchitectureVariant::kCondA, ArchitectureVariant::kCondB,
                 ArchitectureVariant::kCondSharedSinc}) {
    Model model(TinyModelSpec(v), 5);
    Model::Cache c1;
    Vector before = model.Forward(utt, nullptr, ctx, &c1).prominence;
    // Perturb a boundary-branch weight: prominence outputs must move.
    (*model.boundary_head()->mutable_b2())[0] += 0.7;
    Model::Cache c2;
    Vector after = model.Forward(utt, nullptr, ctx, &c2).prominence;
    double diff = 0.0;
    for (size_t i = 0; i < before.size(); ++i)
      diff = std::max(diff, std::fabs(after[i] - before[i]));
    INFO("variant ", VariantName(v));
    CHECK(diff > 1e-9);
  }

  // SHARED_CNN_HEADS: boundary head does not feed prominence.
  Model model(TinyModelSpec(ArchitectureVariant::kSharedCnnHeads), 5);
  Model::Cache c1;
  Vector before = model.Forward(utt, nullptr, ctx, &c1).prominence;
  (*model.boundary_head()->mutable_b2())[0] += 0.7;
  Model::Cache c2;
  Vector after = model.Forward(utt, nullptr, ctx, &c2).prominence;
  for (size_t i = 0; i < before.size(); ++i)
    CHECK(after[i] == before[i]);
}

TEST_CASE("gradient routing with alpha = 1") {
  Utterance utt = MakeUtterance(4, 400, 13);
  PassContext ctx;
  ctx.training = true;
  Rng drop(1);
  ctx.dropout_rng = &drop;

  // Parameter sharing: with alpha = 1 the boundary head sees zero gradient
  // while the shared frontend still trains.
  {
    ModelSpec spec = TinyModelSpec(ArchitectureVariant::kSharedCnnHeads);
    spec.loss.alpha = 1.0;
    Model model(spec, 17);
    model.ZeroGrad();
    Model::Cache cache;
    Model::Output out = model.Forward(utt, nullptr, ctx, &cache);
    Vector dprom(4), dbound(4, 0.0);  // alpha = 1: boundary loss weight 0
    for (int t = 0; t < 4; ++t)
      dprom[t] = out.prominence[t] - utt.labels[t].prominence_degree;
    model.Backward(dprom, dbound, &cache);
    CHECK(MaxAbsGrad(&model, "bound.gru.") == 0.0);
    CHECK(MaxAbsGrad(&model, "bound.head.") == 0.0);
    CHECK(MaxAbsGrad(&model, "frontend.") > 0.0);
    CHECK(MaxAbsGrad(&model, "prom.gru.") > 0.0);
  }

  // Conditioned variants: the boundary branch still receives gradient
  // through the conditioning input.
  for (auto v : {ArchitectureVariant::kCondA, ArchitectureVariant::kCondB,
                 ArchitectureVariant::kCondSharedSinc}) {
    ModelSpec spec = TinyModelSpec(v);
    spec.loss.alpha = 1.0;
    Model model(spec, 19);
    model.ZeroGrad();
    Model::Cache cache;
    Model::Output out = model.Forward(utt, nullptr, ctx, &cache);
    Vector dprom(4), dbound(4, 0.0);
    for (int t = 0; t < 4; ++t)
      dprom[t] = out.prominence[t] - utt.labels[t].prominence_degree;
    model.Backward(dprom, dbound, &cache);
    INFO("variant ", VariantName(v));
    CHECK(MaxAbsGrad(&model, "bound.gru.") > 0.0);
    CHECK(MaxAbsGrad(&model, "bound.head.") > 0.0);
  }

  // Detaching the conditioning signal blocks that route again.
  {
    ModelSpec spec = TinyModelSpec(ArchitectureVariant::kCondA);
    spec.loss.alpha = 1.0;
    spec.condition_detach = true;
    Model model(spec, 23);
    model.ZeroGrad();
    Model::Cache cache;
    Model::Output out = model.Forward(utt, nullptr, ctx, &cache);
    Vector dprom(4), dbound(4, 0.0);
    for (int t = 0; t < 4; ++t) dprom[t] = out.prominence[t] - 0.5;
    model.Backward(dprom, dbound, &cache);
    CHECK(MaxAbsGrad(&model, "bound.gru.") == 0.0);
  }
}

TEST_CASE("total loss combines the two tasks convexly") {
  Vector pp = {0.2, 0.6}, pt = {0.0, 0.6};  // MSE 0.02
  Vector bp = {0.5, 0.7}, bt = {0.4, 0.6};  // MSE 0.01
  LossConfig cfg;
  cfg.scale_prom = 1.0;
  cfg.scale_bound = 1.0;

  cfg.alpha = 1.0;
  CHECK(TotalLoss(pp, pt, bp, bt, cfg) == doctest::Approx(0.02).epsilon(1e-12));
  cfg.alpha = 0.0;
  CHECK(TotalLoss(pp, pt, bp, bt, cfg) == doctest::Approx(0.01).epsilon(1e-12));

  // Worked example: alpha = 0.5 on normalized losses 0.04 and 0.02 -> 0.03.
  Vector pp2 = {0.2, 0.2}, pt2 = {0.0, 0.0};  // MSE 0.04
  Vector bp2 = {0.5, 0.3}, bt2 = {0.4, 0.2};  // MSE 0.01 * 2 = 0.02? No:
  // (0.1^2 + 0.1^2)/2 = 0.01; use scale to land on 0.02.
  cfg.alpha = 0.5;
  cfg.scale_bound = 0.5;
  CHECK(TotalLoss(pp2, pt2, bp2, bt2, cfg) == doctest::Approx(0.03).epsilon(1e-12));

  // Single-task path: boundary absent.
  cfg.alpha = 1.0;
  cfg.scale_prom = 2.0;
  CHECK(TotalLoss(pp2, pt2, {}, {}, cfg) == doctest::Approx(0.02).epsilon(1e-12));

  CHECK_THROWS_AS(TotalLoss({0.1}, {0.1, 0.2}, {}, {}, cfg), ValidationError);
}

TEST_CASE("total loss is linear in alpha with single-task endpoints") {
  Rng rng(29);
  Vector pp(10), pt(10), bp(10), bt(10);
  for (int i = 0; i < 10; ++i) {
    pp[i] = rng.Uniform(0, 1);
    pt[i] = rng.Uniform(0, 1);
    bp[i] = rng.Uniform(0, 1);
    bt[i] = rng.Uniform(0, 1);
  }
  LossConfig cfg;
  cfg.scale_prom = 0.7;
  cfg.scale_bound = 1.3;
  cfg.alpha = 1.0;
  const double l_prom = TotalLoss(pp, pt, bp, bt, cfg);
  cfg.alpha = 0.0;
  const double l_bound = TotalLoss(pp, pt, bp, bt, cfg);
  for (double alpha : {0.0, 0.25, 0.5, 0.95, 1.0}) {
    cfg.alpha = alpha;
    double expect = alpha * l_prom + (1.0 - alpha) * l_bound;
    CHECK(std::fabs(TotalLoss(pp, pt, bp, bt, cfg) - expect) < 1e-12);
  }
}

TEST_CASE("all variants produce identically shaped prominence output") {
  Utterance utt = MakeUtterance(6, 400, 31);
  PassContext ctx;
  for (auto v : kAllVariants) {
    Model model(TinyModelSpec(v), 37);
    Model::Cache cache;
    CHECK(model.Forward(utt, nullptr, ctx, &cache).prominence.size() == 6);
  }
}

TEST_CASE("segment length mismatches are rejected") {
  Model model(TinyModelSpec(ArchitectureVariant::kSingle), 41);
  Utterance utt = MakeUtterance(2, 300, 43);  // expects 400
  PassContext ctx;
  Model::Cache cache;
  CHECK_THROWS_AS(model.Forward(utt, nullptr, ctx, &cache), ValidationError);
}

TEST_CASE("model gradients match finite differences end to end") {
  // Conditioned variant exercises every route including the conditioning
  // slice. Loss: 0.5 * sum((p - y)^2 + (b - yb)^2), inference-mode forward
  // (dropout off) with training-mode batch norm replaced by... the same
  // forward both sides, so FD is consistent either way; use training mode.
  ModelSpec spec = TinyModelSpec(ArchitectureVariant::kCondSharedSinc);
  spec.loss.alpha = 0.5;
  Utterance utt = MakeUtterance(3, 400, 47);
  Model model(spec, 53);
  for (double& b : model.SincLayer()->mutable_params()->band) b *= 0.9;

  PassContext ctx;
  ctx.training = true;

  auto loss_of = [&]() {
    Model::Cache cache;
    Model::Output out = model.Forward(utt, nullptr, ctx, &cache);
    double loss = 0.0;
    for (int t = 0; t < 3; ++t) {
      double dp = out.prominence[t] - utt.labels[t].prominence_degree;
      double db = out.boundary[t] - utt.labels[t].boundary_degree;
      loss += 0.5 * dp * dp + 0.5 * db * db;
    }
    return loss;
  };

  model.ZeroGrad();
  Model::Cache cache;
  Model::Output out = model.Forward(utt, nullptr, ctx, &cache);
  Vector dprom(3), dbound(3);
  for (int t = 0; t < 3; ++t) {
    dprom[t] = out.prominence[t] - utt.labels[t].prominence_degree;
    dbound[t] = out.boundary[t] - utt.labels[t].boundary_degree;
  }
  model.Backward(dprom, dbound, &cache);

  struct Entry {
    std::string name;
    double* value;
    double* grad;
    int64_t size;
  };
  std::vector<Entry> entries;
  model.VisitParams([&](const ParamRef& ref) {
    if (ref.trainable) entries.push_back({ref.name, ref.value, ref.grad, ref.size});
  });
  REQUIRE(entries.size() > 10);

  Rng pick(59);
  for (const auto& e : entries) {
    for (int rep = 0; rep < 2; ++rep) {
      int64_t i = pick.UniformInt(0, e.size - 1);
      double rel = 1.0;
      for (double h : {1e-6, 1e-7}) {
        double saved = e.value[i];
        e.value[i] = saved + h;
        double lp = loss_of();
        e.value[i] = saved - h;
        double lm = loss_of();
        e.value[i] = saved;
        double fd = (lp - lm) / (2.0 * h);
        double denom = std::max({std::fabs(fd), std::fabs(e.grad[i]), 1e-8});
        rel = std::fabs(fd - e.grad[i]) / denom;
        if (rel < 5e-4) break;
      }
      INFO("tensor ", e.name, " index ", i);
      CHECK(rel < 5e-4);
    }
  }
}
