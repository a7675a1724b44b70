// wavprom/mtl/spec.h

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

#ifndef WAVPROM_MTL_SPEC_H_
#define WAVPROM_MTL_SPEC_H_

#include <string>

#include "wavprom/corpus/types.h"
#include "wavprom/frontend/frontend.h"
#include "wavprom/fusion/lexical.h"
#include "wavprom/seqmodel/gru.h"

namespace wavprom {

// The five architectures:
//   SINGLE           - prominence only.
//   SHARED_CNN_HEADS - one shared frontend, separate GRU+dense heads per task.
//   COND_A           - conditioning with separate frontends per task.
//   COND_B           - conditioning with a shared frontend.
//   COND_SHARED_SINC - conditioning; only the sinc first layer is shared,
//                      later conv/GRU/dense layers are task-specific.
// In the conditioned variants the boundary branch's final (sigmoid) score is
// concatenated to the prominence GRU's per-word input.
enum class ArchitectureVariant {
  kSingle,
  kSharedCnnHeads,
  kCondA,
  kCondB,
  kCondSharedSinc,
};

std::string VariantName(ArchitectureVariant v);
ArchitectureVariant VariantFromName(const std::string& name);

// Convex loss combination:
//   L = alpha * L_prom / scale_prom + (1 - alpha) * L_bound / scale_bound.
// Scales bring the two MSEs into the same range; 0 means "measure during the
// first training epoch and freeze".
struct LossConfig {
  double alpha = 0.95;
  double scale_prom = 0.0;
  double scale_bound = 0.0;
};

struct FusionSpec {
  bool use_acoustic_features = false;
  bool use_lexical = false;
  int acoustic_dim_prominence = 34;
  int acoustic_dim_boundary = 27;
  LexicalSpec lexical;
};

struct ModelSpec {
  ArchitectureVariant variant = ArchitectureVariant::kSingle;
  FrontendSpec frontend;
  SequenceHeadSpec head;
  FusionSpec fusion;
  LossConfig loss;
  int max_segment_samples = kDefaultMaxSegmentSamples;
  // Ablation switch: block the gradient through the conditioning score.
  bool condition_detach = false;
};

ModelSpec DefaultModelSpec(ArchitectureVariant variant);

/// All violated structural invariants (empty when the spec is valid):
/// alpha in [0,1] (exactly 1 for SINGLE), a sinc first layer for
/// COND_SHARED_SINC, positive dimensions, dropouts in [0,1).
std::vector<std::string> ModelSpecViolations(const ModelSpec& spec);

/// Throws a ValidationError listing every violated field.
void ValidateModelSpec(const ModelSpec& spec);

std::string ModelSpecToJson(const ModelSpec& spec);
ModelSpec ModelSpecFromJson(const std::string& json_text);

}  // namespace wavprom

#endif  // WAVPROM_MTL_SPEC_H_
