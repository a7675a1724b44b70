// wavprom/frontend/frontend.cc

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

#include "wavprom/frontend/frontend.h"

#include "wavprom/base/error.h"

namespace wavprom {

FrontendSpec DefaultFrontendSpec(FirstLayerKind kind) {
  FrontendSpec spec;
  spec.first_layer = kind;
  ConvBlockSpec first;
  first.num_filters = 32;
  if (kind == FirstLayerKind::kSinc) {
    first.kernel_width = 31;
    first.stride = 2;
  } else {
    first.kernel_width = 51;
    first.stride = 1;
  }
  first.pool_width = 3;
  spec.layers.push_back(first);
  for (int i = 1; i < 4; ++i) spec.layers.push_back(ConvBlockSpec{32, 51, 1, 3});
  return spec;
}

FrontendBlock::FrontendBlock(const ConvBlockSpec& spec,
                             const SincFilterbankParams& sinc_params)
    : spec_(spec), sinc_(std::make_unique<SincConv>(sinc_params)), bn_(spec.num_filters) {
  WAVPROM_REQUIRE(sinc_params.num_filters == spec.num_filters,
                  "frontend: sinc filter count does not match block spec");
}

FrontendBlock::FrontendBlock(const ConvBlockSpec& spec, int in_channels, Rng* init)
    : spec_(spec),
      conv_(std::make_unique<Conv1d>(in_channels, spec.num_filters,
                                     spec.kernel_width, spec.stride, init)),
      bn_(spec.num_filters) {}

void FrontendBlock::Forward(bool training, Cache* cache,
                            std::vector<FeatureMap>* outputs) {
  const size_t n = cache->inputs.size();
  cache->conv.resize(n);
  for (size_t w = 0; w < n; ++w) {
    if (sinc_) {
      // Single-channel input: the frames x 1 map's storage is the waveform.
      sinc_->Forward(cache->inputs[w].d, &cache->conv[w], &cache->sinc);
    } else {
      conv_->Forward(cache->inputs[w], &cache->conv[w]);
    }
  }
  cache->conv_frames.resize(n);
  for (size_t w = 0; w < n; ++w) cache->conv_frames[w] = cache->conv[w].frames;

  bn_.Forward(&cache->conv, training, &cache->bn);

  for (auto& m : cache->conv)
    for (double& v : m.d)
      if (v < 0.0) v = 0.0;  // ReLU

  outputs->resize(n);
  cache->pool_argmax.resize(n);
  for (size_t w = 0; w < n; ++w)
    MaxPoolForward(cache->conv[w], spec_.pool_width, &(*outputs)[w],
                   &cache->pool_argmax[w]);
}

void FrontendBlock::Backward(const std::vector<FeatureMap>& doutputs,
                             Cache* cache, std::vector<FeatureMap>* dinputs) {
  const size_t n = doutputs.size();
  cache->dconv.resize(n);
  for (size_t w = 0; w < n; ++w) {
    FeatureMap& dc = cache->dconv[w];
    EnsureShape(&dc, cache->conv_frames[w], spec_.num_filters);
    ZeroFill(&dc);
    MaxPoolBackward(doutputs[w], cache->pool_argmax[w], &dc);
    // ReLU mask, reconstructed from the cached normalized activations.
    const FeatureMap& xh = cache->bn.xhat[w];
    for (int t = 0; t < dc.frames; ++t) {
      double* g = dc.Frame(t);
      const double* xr = xh.Frame(t);
      for (int c = 0; c < spec_.num_filters; ++c)
        if (bn_.Gamma(c) * xr[c] + bn_.Beta(c) <= 0.0) g[c] = 0.0;
    }
  }

  bn_.Backward(&cache->dconv, cache->bn);

  if (dinputs != nullptr) dinputs->resize(n);
  for (size_t w = 0; w < n; ++w) {
    if (sinc_) {
      sinc_->Backward(cache->inputs[w].d, cache->dconv[w], cache->sinc);
      if (dinputs != nullptr) {
        EnsureShape(&(*dinputs)[w], cache->inputs[w].frames, 1);
        ZeroFill(&(*dinputs)[w]);
      }
    } else {
      conv_->Backward(cache->inputs[w], cache->dconv[w],
                      dinputs != nullptr ? &(*dinputs)[w] : nullptr);
    }
  }
}

void FrontendBlock::VisitParams(const std::string& prefix, const ParamVisitor& visit) {
  if (sinc_)
    sinc_->VisitParams(prefix + "sinc.", visit);
  else
    conv_->VisitParams(prefix + "conv.", visit);
  bn_.VisitParams(prefix + "bn.", visit);
}

Frontend::Frontend(const FrontendSpec& spec, uint64_t seed)
    : Frontend(spec, seed, nullptr) {}

Frontend::Frontend(const FrontendSpec& spec, uint64_t seed,
                   std::shared_ptr<FrontendBlock> shared_first)
    : spec_(spec) {
  WAVPROM_REQUIRE(spec.NumLayers() >= 1, "frontend: need at least one layer");
  Rng init(seed ^ 0x66726f6eULL);
  if (shared_first != nullptr) {
    blocks_.push_back(std::move(shared_first));
  } else if (spec.first_layer == FirstLayerKind::kSinc) {
    const ConvBlockSpec& first = spec.layers[0];
    SincFilterbankParams params =
        MelInit(first.num_filters, spec.sample_rate_hz, spec.sinc_min_hz,
                spec.sample_rate_hz / 2.0, first.kernel_width, first.stride);
    blocks_.push_back(std::make_shared<FrontendBlock>(first, params));
  } else {
    blocks_.push_back(std::make_shared<FrontendBlock>(spec.layers[0], 1, &init));
  }
  for (int i = 1; i < spec.NumLayers(); ++i)
    blocks_.push_back(std::make_shared<FrontendBlock>(
        spec.layers[i], spec.layers[i - 1].num_filters, &init));
}

Matrix Frontend::Embed(const std::vector<const Vector*>& segments, bool training,
                       Cache* cache) {
  const size_t n = segments.size();
  WAVPROM_REQUIRE(n > 0, "frontend: no segments");

  cache->blocks.resize(blocks_.size());
  std::vector<FeatureMap>& first = cache->blocks[0].inputs;
  first.resize(n);
  for (size_t w = 0; w < n; ++w) {
    const Vector& s = *segments[w];
    EnsureShape(&first[w], static_cast<int>(s.size()), 1);
    std::copy(s.begin(), s.end(), first[w].d.begin());
  }

  for (size_t b = 0; b < blocks_.size(); ++b) {
    std::vector<FeatureMap>* out = b + 1 < blocks_.size()
                                       ? &cache->blocks[b + 1].inputs
                                       : &cache->final_maps;
    blocks_[b]->Forward(training, &cache->blocks[b], out);
  }

  // Max across time: the fixed-dimensional word embedding.
  const int dim = EmbeddingDim();
  Matrix embed(static_cast<int>(n), dim);
  cache->embed_argmax.assign(n, std::vector<int>(dim, 0));
  for (size_t w = 0; w < n; ++w) {
    const FeatureMap& m = cache->final_maps[w];
    WAVPROM_REQUIRE(m.frames >= 1, "frontend: feature map collapsed to zero frames");
    double* er = embed.Row(static_cast<int>(w));
    for (int c = 0; c < dim; ++c) {
      double best = m.Frame(0)[c];
      int best_t = 0;
      for (int t = 1; t < m.frames; ++t) {
        if (m.Frame(t)[c] > best) {
          best = m.Frame(t)[c];
          best_t = t;
        }
      }
      er[c] = best;
      cache->embed_argmax[w][c] = best_t;
    }
  }
  return embed;
}

void Frontend::Backward(const Matrix& dembed, Cache* cache) {
  const size_t n = cache->embed_argmax.size();
  cache->dfinal.resize(n);
  for (size_t w = 0; w < n; ++w) {
    const FeatureMap& m = cache->final_maps[w];
    FeatureMap& dm = cache->dfinal[w];
    EnsureShape(&dm, m.frames, m.channels);
    ZeroFill(&dm);
    const double* dr = dembed.Row(static_cast<int>(w));
    for (int c = 0; c < m.channels; ++c)
      dm.Frame(cache->embed_argmax[w][c])[c] += dr[c];
  }

  cache->dblocks.resize(blocks_.size());
  for (int b = static_cast<int>(blocks_.size()) - 1; b >= 0; --b) {
    const std::vector<FeatureMap>& dout =
        b + 1 < static_cast<int>(blocks_.size())
            ? cache->dblocks[b + 1]
            : cache->dfinal;
    blocks_[b]->Backward(dout, &cache->blocks[b], b > 0 ? &cache->dblocks[b] : nullptr);
  }
}

void Frontend::VisitParams(const std::string& prefix, const ParamVisitor& visit) {
  for (size_t b = 0; b < blocks_.size(); ++b)
    blocks_[b]->VisitParams(StrCat(prefix, "block", b, "."), visit);
}

SincConv* Frontend::SincLayer() { return blocks_[0]->sinc(); }

Vector WordEmbed(Frontend* frontend, const Vector& segment) {
  Frontend::Cache cache;
  Matrix embed = frontend->Embed({&segment}, /*training=*/false, &cache);
  return Vector(embed.Row(0), embed.Row(0) + embed.cols);
}

}  // namespace wavprom
