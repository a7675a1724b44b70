// wavprom/frontend/frontend.h

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

#ifndef WAVPROM_FRONTEND_FRONTEND_H_
#define WAVPROM_FRONTEND_FRONTEND_H_

#include <memory>
#include <string>
#include <vector>

#include "wavprom/frontend/conv.h"
#include "wavprom/frontend/sinc.h"

namespace wavprom {

enum class FirstLayerKind { kStandard, kSinc };

// Stack of convolutional blocks (conv -> batch norm -> ReLU -> max pool),
// followed by max pooling across time into a fixed-dimensional word
// embedding. Tuned defaults: 4 layers of 32 filters, width 51, stride 1,
// pool 3; the sinc first layer uses width 31 and stride 2 (width 51 /
// stride 1 in the unconstrained variant). Ranges explored when tuning:
// layers 2-8, filters 16-128, kernel 7-151, pool 2-4, stride 1-2.
struct FrontendSpec {
  FirstLayerKind first_layer = FirstLayerKind::kSinc;
  std::vector<ConvBlockSpec> layers;  // layers[0] describes the first layer
  double sample_rate_hz = 16000.0;
  double sinc_min_hz = 30.0;

  int NumLayers() const { return static_cast<int>(layers.size()); }
  int EmbeddingDim() const { return layers.empty() ? 0 : layers.back().num_filters; }
};

FrontendSpec DefaultFrontendSpec(FirstLayerKind kind);

// One block. The first block convolves the raw single-channel waveform with
// either sinc-constrained or unconstrained kernels; later blocks are always
// unconstrained.
class FrontendBlock {
 public:
  FrontendBlock(const ConvBlockSpec& spec, const SincFilterbankParams& sinc_params);
  FrontendBlock(const ConvBlockSpec& spec, int in_channels, Rng* init);

  // All per-word buffers live here and are recycled across calls: `inputs`
  // must be filled by the caller before Forward; `conv` is scratch that holds
  // the post-activation maps after Forward.
  struct Cache {
    std::vector<FeatureMap> inputs;
    std::vector<FeatureMap> conv;
    std::vector<FeatureMap> dconv;
    BatchNorm1d::Cache bn;
    std::vector<std::vector<int>> pool_argmax;
    std::vector<int> conv_frames;
    SincConv::Cache sinc;
  };

  // Reads cache->inputs; batch-norm statistics span all words of the call.
  void Forward(bool training, Cache* cache, std::vector<FeatureMap>* outputs);
  // dinputs may be null for the first block.
  void Backward(const std::vector<FeatureMap>& doutputs, Cache* cache,
                std::vector<FeatureMap>* dinputs);

  void VisitParams(const std::string& prefix, const ParamVisitor& visit);
  int out_channels() const { return spec_.num_filters; }
  bool IsSinc() const { return sinc_ != nullptr; }
  SincConv* sinc() { return sinc_.get(); }
  const SincConv* sinc() const { return sinc_.get(); }
  Conv1d* conv() { return conv_.get(); }

 private:
  ConvBlockSpec spec_;
  std::unique_ptr<SincConv> sinc_;
  std::unique_ptr<Conv1d> conv_;
  BatchNorm1d bn_;
};

class Frontend {
 public:
  Frontend(const FrontendSpec& spec, uint64_t seed);
  // Builds a frontend whose first block aliases an existing one (the
  // shared-sinc multi-task wiring).
  Frontend(const FrontendSpec& spec, uint64_t seed,
           std::shared_ptr<FrontendBlock> shared_first);

  struct Cache {
    std::vector<FrontendBlock::Cache> blocks;
    std::vector<FeatureMap> final_maps;            // last block's pooled outputs
    std::vector<std::vector<FeatureMap>> dblocks;  // backward scratch per block
    std::vector<FeatureMap> dfinal;
    std::vector<std::vector<int>> embed_argmax;    // [word][channel]
  };

  /// Maps per-word waveform segments to a (num_words x embedding_dim) matrix.
  /// In training mode batch-norm statistics span the words of this call.
  Matrix Embed(const std::vector<const Vector*>& segments, bool training,
               Cache* cache);
  void Backward(const Matrix& dembed, Cache* cache);

  void VisitParams(const std::string& prefix, const ParamVisitor& visit);
  int EmbeddingDim() const { return spec_.EmbeddingDim(); }
  const FrontendSpec& spec() const { return spec_; }
  std::shared_ptr<FrontendBlock> block(int i) { return blocks_[i]; }
  /// The sinc layer, or null for a standard first layer.
  SincConv* SincLayer();

 private:
  FrontendSpec spec_;
  std::vector<std::shared_ptr<FrontendBlock>> blocks_;
};

/// Single-segment embedding in inference mode.
Vector WordEmbed(Frontend* frontend, const Vector& segment);

}  // namespace wavprom

#endif  // WAVPROM_FRONTEND_FRONTEND_H_
