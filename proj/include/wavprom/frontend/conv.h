// wavprom/frontend/conv.h

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

#ifndef WAVPROM_FRONTEND_CONV_H_
#define WAVPROM_FRONTEND_CONV_H_

#include <string>
#include <vector>

#include "wavprom/base/matrix.h"
#include "wavprom/base/params.h"
#include "wavprom/base/rng.h"

namespace wavprom {

// Time-major feature map, channels contiguous per frame: d[t * channels + c].
// With this layout a valid convolution window is one contiguous span.
struct FeatureMap {
  int frames = 0;
  int channels = 0;
  Vector d;

  FeatureMap() = default;
  FeatureMap(int t, int c) : frames(t), channels(c), d(static_cast<size_t>(t) * c, 0.0) {}
  double* Frame(int t) { return d.data() + static_cast<size_t>(t) * channels; }
  const double* Frame(int t) const { return d.data() + static_cast<size_t>(t) * channels; }
};

/// Reshapes without shrinking capacity; newly exposed elements are
/// unspecified, existing ones keep their values. Training touches every word
/// of every utterance each epoch, so the per-word buffers are recycled.
inline void EnsureShape(FeatureMap* m, int frames, int channels) {
  m->frames = frames;
  m->channels = channels;
  m->d.resize(static_cast<size_t>(frames) * channels);
}

inline void ZeroFill(FeatureMap* m) { std::fill(m->d.begin(), m->d.end(), 0.0); }

struct ConvBlockSpec {
  int num_filters = 32;
  int kernel_width = 51;
  int stride = 1;
  int pool_width = 3;
};

/// Valid (no padding) convolution output length: floor((len - kernel)/stride) + 1.
int ConvOutputLength(int input_len, int kernel_width, int stride);
/// Non-overlapping max-pool output length: floor((len - pool)/pool) + 1.
int PoolOutputLength(int input_len, int pool_width);

// Plain learnable 1-D convolution, valid padding, no bias (batch norm
// follows). Weight layout: row o = [k0c0 k0c1 ... k0c(Cin-1) k1c0 ...], which
// matches the input layout so the inner product is contiguous.
class Conv1d {
 public:
  Conv1d(int in_channels, int out_channels, int kernel_width, int stride, Rng* init);

  void Forward(const FeatureMap& x, FeatureMap* y) const;
  // dx may be null (not needed for the first layer).
  void Backward(const FeatureMap& x, const FeatureMap& dy, FeatureMap* dx);

  void VisitParams(const std::string& prefix, const ParamVisitor& visit);
  int OutputFrames(int input_len) const;

  int in_channels() const { return in_channels_; }
  int out_channels() const { return out_channels_; }
  int kernel_width() const { return kernel_width_; }
  int stride() const { return stride_; }
  Matrix* mutable_weight() { return &weight_; }

 private:
  int in_channels_, out_channels_, kernel_width_, stride_;
  Matrix weight_;       // out_channels x (kernel_width * in_channels)
  Matrix grad_weight_;
};

// Per-channel batch normalization over the frames of all words passed to one
// Forward call (the normalization extent is the utterance in training).
// Inference uses running statistics.
class BatchNorm1d {
 public:
  explicit BatchNorm1d(int channels);

  struct Cache {
    Vector mean, inv_sd;
    std::vector<FeatureMap> xhat;
    int64_t count = 0;
  };

  // In-place: maps hold x on entry, gamma*xhat + beta on exit.
  void Forward(std::vector<FeatureMap>* maps, bool training, Cache* cache);
  // In-place: maps hold dL/dy on entry, dL/dx on exit.
  void Backward(std::vector<FeatureMap>* grads, const Cache& cache);

  double Gamma(int c) const { return gamma_[c]; }
  double Beta(int c) const { return beta_[c]; }
  void VisitParams(const std::string& prefix, const ParamVisitor& visit);

 private:
  int channels_;
  Vector gamma_, beta_, grad_gamma_, grad_beta_;
  Vector running_mean_, running_var_;
  double momentum_ = 0.1;
  double eps_ = 1e-5;
};

/// Non-overlapping temporal max pooling; argmax holds the winning input frame
/// per (output frame, channel) for the backward scatter.
void MaxPoolForward(const FeatureMap& x, int pool_width, FeatureMap* y,
                    std::vector<int>* argmax);
void MaxPoolBackward(const FeatureMap& dy, const std::vector<int>& argmax,
                     FeatureMap* dx);

}  // namespace wavprom

#endif  // WAVPROM_FRONTEND_CONV_H_
