// wavprom/mtl/model.cc

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

#include "wavprom/mtl/model.h"

#include <set>

#include "wavprom/base/error.h"

namespace wavprom {

namespace {

double EffectiveScale(double s) { return s > 0.0 ? s : 1.0; }

double MaskedMse(const Vector& pred, const Vector& truth) {
  if (pred.size() != truth.size())
    ThrowValidation("loss: prediction/target length mismatch (", pred.size(),
                    " vs ", truth.size(), ")");
  WAVPROM_REQUIRE(!pred.empty(), "loss: empty prediction vector");
  double mse = 0.0;
  for (size_t i = 0; i < pred.size(); ++i) {
    double d = pred[i] - truth[i];
    mse += d * d;
  }
  return mse / static_cast<double>(pred.size());
}

}  // namespace

FusionContext BuildFusionContext(
    const FusionSources* sources, const ModelSpec& spec,
    const std::vector<const Utterance*>& train_utterances) {
  FusionContext ctx;
  ctx.sources = sources;
  if (!spec.fusion.use_acoustic_features) return ctx;
  WAVPROM_REQUIRE(sources != nullptr && sources->acoustic_prominence != nullptr,
                  "fusion: acoustic features enabled but no prominence table");
  std::vector<std::pair<std::string, int>> words;
  for (const Utterance* u : train_utterances)
    for (int w = 0; w < u->NumWords(); ++w)
      words.emplace_back(u->utterance_id, w);
  ctx.stats_prominence = ComputeFeatureStats(*sources->acoustic_prominence, words);
  if (sources->acoustic_boundary != nullptr)
    ctx.stats_boundary = ComputeFeatureStats(*sources->acoustic_boundary, words);
  return ctx;
}

double TotalLoss(const Vector& prom_pred, const Vector& prom_true,
                 const Vector& bound_pred, const Vector& bound_true,
                 const LossConfig& cfg) {
  WAVPROM_REQUIRE(cfg.alpha >= 0.0 && cfg.alpha <= 1.0, "loss: alpha must be in [0,1]");
  const double prom = MaskedMse(prom_pred, prom_true) / EffectiveScale(cfg.scale_prom);
  if (bound_pred.empty() && bound_true.empty()) return prom;
  const double bound =
      MaskedMse(bound_pred, bound_true) / EffectiveScale(cfg.scale_bound);
  return cfg.alpha * prom + (1.0 - cfg.alpha) * bound;
}

Model::Model(const ModelSpec& spec, uint64_t seed) : spec_(spec) {
  ValidateModelSpec(spec_);
  Rng rng(seed ^ 0x6d6f64656cULL);

  frontend_prom_ = std::make_shared<Frontend>(spec_.frontend, seed);
  switch (spec_.variant) {
    case ArchitectureVariant::kSingle:
      break;
    case ArchitectureVariant::kSharedCnnHeads:
    case ArchitectureVariant::kCondB:
      frontend_bound_ = frontend_prom_;
      break;
    case ArchitectureVariant::kCondA:
      frontend_bound_ = std::make_shared<Frontend>(spec_.frontend, seed + 1);
      break;
    case ArchitectureVariant::kCondSharedSinc:
      frontend_bound_ = std::make_shared<Frontend>(spec_.frontend, seed + 1,
                                                   frontend_prom_->block(0));
      break;
  }

  const int embed_dim = spec_.frontend.EmbeddingDim();
  const int lex_dim =
      spec_.fusion.use_lexical ? spec_.fusion.lexical.projection_dim : 0;
  in_dim_prom_ = embed_dim + lex_dim +
                 (spec_.fusion.use_acoustic_features
                      ? spec_.fusion.acoustic_dim_prominence
                      : 0) +
                 (Conditioned() ? 1 : 0);
  gru_prom_ = std::make_unique<GruStack>(in_dim_prom_, spec_.head, &rng);
  head_prom_ = std::make_unique<DenseHead>(gru_prom_->OutputDim(), spec_.head.fc1_dim,
                                           spec_.head.fc1_dropout, &rng);
  if (spec_.fusion.use_lexical)
    lex_prom_ = std::make_unique<LexicalProjector>(spec_.fusion.lexical, &rng);

  if (HasBoundary()) {
    in_dim_bound_ = embed_dim + lex_dim +
                    (spec_.fusion.use_acoustic_features
                         ? spec_.fusion.acoustic_dim_boundary
                         : 0);
    gru_bound_ = std::make_unique<GruStack>(in_dim_bound_, spec_.head, &rng);
    head_bound_ = std::make_unique<DenseHead>(
        gru_bound_->OutputDim(), spec_.head.fc1_dim, spec_.head.fc1_dropout, &rng);
    if (spec_.fusion.use_lexical)
      lex_bound_ = std::make_unique<LexicalProjector>(spec_.fusion.lexical, &rng);
  }
}

Matrix Model::AssembleGruInput(const Utterance& utt, const Matrix& embed,
                               const FusionContext* fusion, bool boundary_branch,
                               const Vector* cond_scores, const PassContext& ctx,
                               LexicalProjector::Cache* lex_cache) {
  const int t_total = embed.rows;
  const int dim = boundary_branch ? in_dim_bound_ : in_dim_prom_;
  Matrix in(t_total, dim);

  Matrix lex_out;
  if (spec_.fusion.use_lexical) {
    WAVPROM_REQUIRE(fusion != nullptr && fusion->sources != nullptr &&
                        fusion->sources->lexical != nullptr,
                    "fusion: lexical enabled but no embedding table supplied");
    std::vector<std::string> tokens;
    tokens.reserve(t_total);
    for (const auto& w : utt.words) tokens.push_back(w.token);
    LexicalProjector& proj = boundary_branch ? *lex_bound_ : *lex_prom_;
    lex_out = proj.Forward(tokens, *fusion->sources->lexical, ctx, lex_cache);
  }

  const WordFeatureTable* table = nullptr;
  const FeatureStats* stats = nullptr;
  if (spec_.fusion.use_acoustic_features) {
    WAVPROM_REQUIRE(fusion != nullptr && fusion->sources != nullptr,
                    "fusion: acoustic features enabled but no tables supplied");
    table = boundary_branch ? fusion->sources->acoustic_boundary
                            : fusion->sources->acoustic_prominence;
    stats = boundary_branch ? &fusion->stats_boundary : &fusion->stats_prominence;
    WAVPROM_REQUIRE(table != nullptr, "fusion: missing acoustic table for ",
                    boundary_branch ? "boundary" : "prominence", " branch");
  }

  // Fixed slice order: [cnn embedding | acoustic | lexical | conditioning].
  for (int t = 0; t < t_total; ++t) {
    Vector cnn(embed.Row(t), embed.Row(t) + embed.cols);
    Vector acoustic, lexical;
    if (table != nullptr) {
      const Vector* raw = table->Find(utt.utterance_id, t);
      if (raw == nullptr)
        ThrowValidation("feature table missing word (", utt.utterance_id, ", ", t, ")");
      acoustic = Standardize(*raw, *stats);
    }
    if (spec_.fusion.use_lexical)
      lexical.assign(lex_out.Row(t), lex_out.Row(t) + lex_out.cols);
    Vector fused = FuseWordVector(cnn, table != nullptr ? &acoustic : nullptr,
                                  spec_.fusion.use_lexical ? &lexical : nullptr);
    if (!boundary_branch && Conditioned()) fused.push_back((*cond_scores)[t]);
    WAVPROM_REQUIRE(static_cast<int>(fused.size()) == dim,
                    "fusion: assembled dim ", fused.size(), " != expected ", dim);
    std::copy(fused.begin(), fused.end(), in.Row(t));
  }
  return in;
}

Model::Output Model::Forward(const Utterance& utt, const FusionContext* fusion,
                             const PassContext& ctx, Cache* cache) {
  const int t_total = utt.NumWords();
  WAVPROM_REQUIRE(t_total >= 1, "model: empty utterance");
  for (const auto& w : utt.words)
    WAVPROM_REQUIRE(static_cast<int>(w.samples.size()) == spec_.max_segment_samples,
                    "model: segment length ", w.samples.size(),
                    " does not match the expected ", spec_.max_segment_samples);
  cache->num_words = t_total;

  std::vector<const Vector*> segments;
  segments.reserve(t_total);
  for (const auto& w : utt.words) segments.push_back(&w.samples);

  Output out;
  Matrix embed_prom;
  if (HasBoundary()) {
    Matrix embed_bound;
    if (SharedFrontend()) {
      embed_prom = frontend_prom_->Embed(segments, ctx.training, &cache->fe_prom);
      embed_bound = embed_prom;
    } else {
      embed_bound = frontend_bound_->Embed(segments, ctx.training, &cache->fe_bound);
      embed_prom = frontend_prom_->Embed(segments, ctx.training, &cache->fe_prom);
    }
    cache->in_bound = AssembleGruInput(utt, embed_bound, fusion,
                                       /*boundary_branch=*/true, nullptr, ctx,
                                       &cache->lex_bound);
    cache->hidden_bound =
        gru_bound_->Forward(cache->in_bound, t_total, ctx, &cache->gru_bound);
    out.boundary =
        head_bound_->Forward(cache->hidden_bound, t_total, ctx, &cache->head_bound);
  } else {
    embed_prom = frontend_prom_->Embed(segments, ctx.training, &cache->fe_prom);
  }

  cache->in_prom = AssembleGruInput(utt, embed_prom, fusion,
                                    /*boundary_branch=*/false,
                                    Conditioned() ? &out.boundary : nullptr, ctx,
                                    &cache->lex_prom);
  cache->hidden_prom =
      gru_prom_->Forward(cache->in_prom, t_total, ctx, &cache->gru_prom);
  out.prominence =
      head_prom_->Forward(cache->hidden_prom, t_total, ctx, &cache->head_prom);
  return out;
}

void Model::Backward(const Vector& dprom, const Vector& dbound, Cache* cache) {
  const int t_total = cache->num_words;
  const int embed_dim = spec_.frontend.EmbeddingDim();
  const int lex_dim =
      spec_.fusion.use_lexical ? spec_.fusion.lexical.projection_dim : 0;

  // Prominence branch.
  Matrix dhidden_prom = head_prom_->Backward(dprom, cache->head_prom);
  Matrix din_prom = gru_prom_->Backward(dhidden_prom, cache->gru_prom);

  Matrix dembed_prom(t_total, embed_dim);
  for (int t = 0; t < t_total; ++t)
    for (int c = 0; c < embed_dim; ++c) dembed_prom.At(t, c) = din_prom.At(t, c);

  if (spec_.fusion.use_lexical) {
    const int lex_off = in_dim_prom_ - lex_dim - (Conditioned() ? 1 : 0);
    Matrix dlex(t_total, lex_dim);
    for (int t = 0; t < t_total; ++t)
      for (int c = 0; c < lex_dim; ++c) dlex.At(t, c) = din_prom.At(t, lex_off + c);
    lex_prom_->Backward(dlex, cache->lex_prom);
  }

  if (HasBoundary()) {
    // Boundary scores get gradient from their own loss term plus, in the
    // conditioned variants, from the prominence GRU input slice.
    Vector db_total(t_total, 0.0);
    if (!dbound.empty()) {
      WAVPROM_REQUIRE(static_cast<int>(dbound.size()) == t_total,
                      "model: boundary gradient length mismatch");
      db_total = dbound;
    }
    if (Conditioned() && !spec_.condition_detach)
      for (int t = 0; t < t_total; ++t)
        db_total[t] += din_prom.At(t, in_dim_prom_ - 1);

    Matrix dhidden_bound = head_bound_->Backward(db_total, cache->head_bound);
    Matrix din_bound = gru_bound_->Backward(dhidden_bound, cache->gru_bound);

    Matrix dembed_bound(t_total, embed_dim);
    for (int t = 0; t < t_total; ++t)
      for (int c = 0; c < embed_dim; ++c)
        dembed_bound.At(t, c) = din_bound.At(t, c);

    if (spec_.fusion.use_lexical) {
      const int lex_off = in_dim_bound_ - lex_dim;
      Matrix dlex(t_total, lex_dim);
      for (int t = 0; t < t_total; ++t)
        for (int c = 0; c < lex_dim; ++c)
          dlex.At(t, c) = din_bound.At(t, lex_off + c);
      lex_bound_->Backward(dlex, cache->lex_bound);
    }

    if (SharedFrontend()) {
      for (size_t i = 0; i < dembed_prom.d.size(); ++i)
        dembed_prom.d[i] += dembed_bound.d[i];
      frontend_prom_->Backward(dembed_prom, &cache->fe_prom);
    } else {
      frontend_prom_->Backward(dembed_prom, &cache->fe_prom);
      frontend_bound_->Backward(dembed_bound, &cache->fe_bound);
    }
  } else {
    frontend_prom_->Backward(dembed_prom, &cache->fe_prom);
  }
}

void Model::VisitParams(const ParamVisitor& visit) {
  std::set<const double*> seen;
  auto dedup = [&](const ParamRef& ref) {
    if (!seen.insert(ref.value).second) return;
    visit(ref);
  };
  if (SharedFrontend()) {
    frontend_prom_->VisitParams("frontend.", dedup);
  } else if (HasBoundary()) {
    frontend_prom_->VisitParams("frontend_prom.", dedup);
    frontend_bound_->VisitParams("frontend_bound.", dedup);
  } else {
    frontend_prom_->VisitParams("frontend.", dedup);
  }
  gru_prom_->VisitParams("prom.gru.", dedup);
  head_prom_->VisitParams("prom.head.", dedup);
  if (lex_prom_) lex_prom_->VisitParams("prom.lex.", dedup);
  if (HasBoundary()) {
    gru_bound_->VisitParams("bound.gru.", dedup);
    head_bound_->VisitParams("bound.head.", dedup);
    if (lex_bound_) lex_bound_->VisitParams("bound.lex.", dedup);
  }
}

void Model::ZeroGrad() {
  VisitParams([](const ParamRef& ref) {
    if (ref.grad != nullptr) std::fill(ref.grad, ref.grad + ref.size, 0.0);
  });
}

}  // namespace wavprom
