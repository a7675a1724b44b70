// wavprom/mtl/model.h

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

#ifndef WAVPROM_MTL_MODEL_H_
#define WAVPROM_MTL_MODEL_H_

#include <memory>
#include <string>
#include <vector>

#include "wavprom/corpus/types.h"
#include "wavprom/fusion/features.h"
#include "wavprom/fusion/lexical.h"
#include "wavprom/mtl/spec.h"

namespace wavprom {

// Corpus-wide fusion inputs (raw tables, frozen lexical vectors).
struct FusionSources {
  const WordFeatureTable* acoustic_prominence = nullptr;  // 34-dim set
  const WordFeatureTable* acoustic_boundary = nullptr;    // 27-dim set
  const LexicalTable* lexical = nullptr;
};

// Per-model fusion state: sources plus standardization statistics computed on
// the model's own training words.
struct FusionContext {
  const FusionSources* sources = nullptr;
  FeatureStats stats_prominence;
  FeatureStats stats_boundary;
};

FusionContext BuildFusionContext(
    const FusionSources* sources, const ModelSpec& spec,
    const std::vector<const Utterance*>& train_utterances);

/// Convex combination of the two per-task MSEs (masked by construction: only
/// the supplied word scores participate). Boundary vectors empty -> the
/// single-task value L_prom / scale_prom. A zero scale means "not yet
/// measured" and is treated as 1.
double TotalLoss(const Vector& prom_pred, const Vector& prom_true,
                 const Vector& bound_pred, const Vector& bound_true,
                 const LossConfig& cfg);

// One prominence-detection network in any of the five variants. Forward and
// backward operate on whole utterances; batch-norm statistics span the words
// of the utterance in training mode.
class Model {
 public:
  Model(const ModelSpec& spec, uint64_t seed);

  struct Output {
    Vector prominence;
    Vector boundary;  // empty for SINGLE
  };

  struct Cache {
    Frontend::Cache fe_prom, fe_bound;
    Matrix in_prom, in_bound;
    GruStack::Cache gru_prom, gru_bound;
    Matrix hidden_prom, hidden_bound;
    DenseHead::Cache head_prom, head_bound;
    LexicalProjector::Cache lex_prom, lex_bound;
    int num_words = 0;
  };

  Output Forward(const Utterance& utt, const FusionContext* fusion,
                 const PassContext& ctx, Cache* cache);

  /// dprom/dbound: dL/dscore per word (dbound may be empty). Accumulates
  /// parameter gradients; in conditioned variants the prominence gradient
  /// flows through the conditioning score into the boundary branch unless
  /// the spec requests detaching.
  void Backward(const Vector& dprom, const Vector& dbound, Cache* cache);

  /// Visits each parameter tensor exactly once (shared modules are deduped).
  void VisitParams(const ParamVisitor& visit);
  void ZeroGrad();

  const ModelSpec& spec() const { return spec_; }
  ModelSpec* mutable_spec() { return &spec_; }
  bool HasBoundary() const { return spec_.variant != ArchitectureVariant::kSingle; }
  bool Conditioned() const {
    return spec_.variant == ArchitectureVariant::kCondA ||
           spec_.variant == ArchitectureVariant::kCondB ||
           spec_.variant == ArchitectureVariant::kCondSharedSinc;
  }
  bool SharedFrontend() const {
    return spec_.variant == ArchitectureVariant::kSharedCnnHeads ||
           spec_.variant == ArchitectureVariant::kCondB;
  }

  Frontend* prominence_frontend() { return frontend_prom_.get(); }
  Frontend* boundary_frontend() { return frontend_bound_.get(); }
  GruStack* prominence_gru() { return gru_prom_.get(); }
  GruStack* boundary_gru() { return gru_bound_.get(); }
  DenseHead* prominence_head() { return head_prom_.get(); }
  DenseHead* boundary_head() { return head_bound_.get(); }
  /// The prominence-path sinc layer, or null for a standard first layer.
  SincConv* SincLayer() { return frontend_prom_->SincLayer(); }

  int ProminenceInputDim() const { return in_dim_prom_; }
  int BoundaryInputDim() const { return in_dim_bound_; }

 private:
  Matrix AssembleGruInput(const Utterance& utt, const Matrix& embed,
                          const FusionContext* fusion, bool boundary_branch,
                          const Vector* cond_scores, const PassContext& ctx,
                          LexicalProjector::Cache* lex_cache);

  ModelSpec spec_;
  std::shared_ptr<Frontend> frontend_prom_;
  std::shared_ptr<Frontend> frontend_bound_;  // may alias frontend_prom_
  std::unique_ptr<GruStack> gru_prom_, gru_bound_;
  std::unique_ptr<DenseHead> head_prom_, head_bound_;
  std::unique_ptr<LexicalProjector> lex_prom_, lex_bound_;
  int in_dim_prom_ = 0, in_dim_bound_ = 0;
};

}  // namespace wavprom

#endif  // WAVPROM_MTL_MODEL_H_
