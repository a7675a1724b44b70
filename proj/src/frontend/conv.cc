// wavprom/frontend/conv.cc

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

#include "wavprom/frontend/conv.h"

#include <cmath>

#include "wavprom/base/error.h"

namespace wavprom {

int ConvOutputLength(int input_len, int kernel_width, int stride) {
  if (input_len < kernel_width)
    ThrowValidation("conv: input length ", input_len, " shorter than kernel ",
                    kernel_width);
  return (input_len - kernel_width) / stride + 1;
}

int PoolOutputLength(int input_len, int pool_width) {
  if (input_len < pool_width)
    ThrowValidation("pool: input length ", input_len, " shorter than pool width ",
                    pool_width);
  return (input_len - pool_width) / pool_width + 1;
}

Conv1d::Conv1d(int in_channels, int out_channels, int kernel_width, int stride,
               Rng* init)
    : in_channels_(in_channels),
      out_channels_(out_channels),
      kernel_width_(kernel_width),
      stride_(stride),
      weight_(out_channels, kernel_width * in_channels),
      grad_weight_(out_channels, kernel_width * in_channels) {
  WAVPROM_REQUIRE(in_channels >= 1 && out_channels >= 1 && kernel_width >= 1 &&
                      stride >= 1,
                  "conv: all dimensions must be positive");
  const double bound = 1.0 / std::sqrt(static_cast<double>(kernel_width * in_channels));
  for (double& w : weight_.d) w = init->Uniform(-bound, bound);
}

int Conv1d::OutputFrames(int input_len) const {
  return ConvOutputLength(input_len, kernel_width_, stride_);
}

void Conv1d::Forward(const FeatureMap& x, FeatureMap* y) const {
  if (x.channels != in_channels_)
    ThrowValidation("conv: expected ", in_channels_, " channels, got ", x.channels);
  const int frames = OutputFrames(x.frames);
  const int span = kernel_width_ * in_channels_;
  EnsureShape(y, frames, out_channels_);
  for (int t = 0; t < frames; ++t) {
    const double* xw = x.Frame(t * stride_);
    double* yr = y->Frame(t);
    for (int o = 0; o < out_channels_; ++o) {
      const double* wr = weight_.Row(o);
      double acc = 0.0;
      for (int j = 0; j < span; ++j) acc += wr[j] * xw[j];
      yr[o] = acc;
    }
  }
}

void Conv1d::Backward(const FeatureMap& x, const FeatureMap& dy, FeatureMap* dx) {
  const int span = kernel_width_ * in_channels_;
  if (dx != nullptr) {
    EnsureShape(dx, x.frames, x.channels);
    ZeroFill(dx);
  }
  for (int t = 0; t < dy.frames; ++t) {
    const double* xw = x.Frame(t * stride_);
    const double* dyr = dy.Frame(t);
    double* dxw = dx != nullptr ? dx->Frame(t * stride_) : nullptr;
    for (int o = 0; o < out_channels_; ++o) {
      const double g = dyr[o];
      if (g == 0.0) continue;
      double* gw = grad_weight_.Row(o);
      for (int j = 0; j < span; ++j) gw[j] += g * xw[j];
      if (dxw != nullptr) {
        const double* wr = weight_.Row(o);
        for (int j = 0; j < span; ++j) dxw[j] += g * wr[j];
      }
    }
  }
}

void Conv1d::VisitParams(const std::string& prefix, const ParamVisitor& visit) {
  visit({prefix + "weight", weight_.d.data(), grad_weight_.d.data(),
         static_cast<int64_t>(weight_.Size()), true});
}

BatchNorm1d::BatchNorm1d(int channels)
    : channels_(channels),
      gamma_(channels, 1.0),
      beta_(channels, 0.0),
      grad_gamma_(channels, 0.0),
      grad_beta_(channels, 0.0),
      running_mean_(channels, 0.0),
      running_var_(channels, 1.0) {}

void BatchNorm1d::Forward(std::vector<FeatureMap>* maps, bool training,
                          Cache* cache) {
  if (!training) {
    for (auto& m : *maps) {
      for (int t = 0; t < m.frames; ++t) {
        double* row = m.Frame(t);
        for (int c = 0; c < channels_; ++c) {
          double inv = 1.0 / std::sqrt(running_var_[c] + eps_);
          row[c] = gamma_[c] * (row[c] - running_mean_[c]) * inv + beta_[c];
        }
      }
    }
    return;
  }

  Vector mean(channels_, 0.0), var(channels_, 0.0);
  int64_t count = 0;
  for (const auto& m : *maps) {
    count += m.frames;
    for (int t = 0; t < m.frames; ++t) {
      const double* row = m.Frame(t);
      for (int c = 0; c < channels_; ++c) mean[c] += row[c];
    }
  }
  WAVPROM_REQUIRE(count > 0, "batchnorm: empty input");
  for (int c = 0; c < channels_; ++c) mean[c] /= static_cast<double>(count);
  for (const auto& m : *maps) {
    for (int t = 0; t < m.frames; ++t) {
      const double* row = m.Frame(t);
      for (int c = 0; c < channels_; ++c) {
        double d = row[c] - mean[c];
        var[c] += d * d;
      }
    }
  }
  for (int c = 0; c < channels_; ++c) var[c] /= static_cast<double>(count);

  cache->mean = mean;
  cache->count = count;
  cache->inv_sd.resize(channels_);
  for (int c = 0; c < channels_; ++c)
    cache->inv_sd[c] = 1.0 / std::sqrt(var[c] + eps_);

  cache->xhat.resize(maps->size());
  for (size_t w = 0; w < maps->size(); ++w) {
    FeatureMap& m = (*maps)[w];
    FeatureMap& xh = cache->xhat[w];
    EnsureShape(&xh, m.frames, m.channels);
    for (int t = 0; t < m.frames; ++t) {
      double* row = m.Frame(t);
      double* xr = xh.Frame(t);
      for (int c = 0; c < channels_; ++c) {
        xr[c] = (row[c] - mean[c]) * cache->inv_sd[c];
        row[c] = gamma_[c] * xr[c] + beta_[c];
      }
    }
  }

  for (int c = 0; c < channels_; ++c) {
    running_mean_[c] = (1.0 - momentum_) * running_mean_[c] + momentum_ * mean[c];
    running_var_[c] = (1.0 - momentum_) * running_var_[c] + momentum_ * var[c];
  }
}

void BatchNorm1d::Backward(std::vector<FeatureMap>* grads, const Cache& cache) {
  const double n = static_cast<double>(cache.count);
  Vector sum_dxhat(channels_, 0.0), sum_dxhat_xhat(channels_, 0.0);

  // dy -> dxhat (in place), accumulating the per-channel reductions and the
  // gamma/beta gradients.
  for (size_t m = 0; m < grads->size(); ++m) {
    FeatureMap& g = (*grads)[m];
    const FeatureMap& xh = cache.xhat[m];
    for (int t = 0; t < g.frames; ++t) {
      double* gr = g.Frame(t);
      const double* xr = xh.Frame(t);
      for (int c = 0; c < channels_; ++c) {
        grad_gamma_[c] += gr[c] * xr[c];
        grad_beta_[c] += gr[c];
        gr[c] *= gamma_[c];
        sum_dxhat[c] += gr[c];
        sum_dxhat_xhat[c] += gr[c] * xr[c];
      }
    }
  }

  for (size_t m = 0; m < grads->size(); ++m) {
    FeatureMap& g = (*grads)[m];
    const FeatureMap& xh = cache.xhat[m];
    for (int t = 0; t < g.frames; ++t) {
      double* gr = g.Frame(t);
      const double* xr = xh.Frame(t);
      for (int c = 0; c < channels_; ++c) {
        gr[c] = cache.inv_sd[c] *
                (gr[c] - sum_dxhat[c] / n - xr[c] * sum_dxhat_xhat[c] / n);
      }
    }
  }
}

void BatchNorm1d::VisitParams(const std::string& prefix, const ParamVisitor& visit) {
  visit({prefix + "gamma", gamma_.data(), grad_gamma_.data(),
         static_cast<int64_t>(channels_), true});
  visit({prefix + "beta", beta_.data(), grad_beta_.data(),
         static_cast<int64_t>(channels_), true});
  visit({prefix + "running_mean", running_mean_.data(), nullptr,
         static_cast<int64_t>(channels_), false});
  visit({prefix + "running_var", running_var_.data(), nullptr,
         static_cast<int64_t>(channels_), false});
}

void MaxPoolForward(const FeatureMap& x, int pool_width, FeatureMap* y,
                    std::vector<int>* argmax) {
  const int frames = PoolOutputLength(x.frames, pool_width);
  EnsureShape(y, frames, x.channels);
  argmax->assign(static_cast<size_t>(frames) * x.channels, 0);
  for (int t = 0; t < frames; ++t) {
    double* yr = y->Frame(t);
    int* am = argmax->data() + static_cast<size_t>(t) * x.channels;
    for (int c = 0; c < x.channels; ++c) {
      int base = t * pool_width;
      double best = x.Frame(base)[c];
      int best_i = base;
      for (int k = 1; k < pool_width; ++k) {
        double v = x.Frame(base + k)[c];
        if (v > best) {
          best = v;
          best_i = base + k;
        }
      }
      yr[c] = best;
      am[c] = best_i;
    }
  }
}

void MaxPoolBackward(const FeatureMap& dy, const std::vector<int>& argmax,
                     FeatureMap* dx) {
  for (int t = 0; t < dy.frames; ++t) {
    const double* dyr = dy.Frame(t);
    const int* am = argmax.data() + static_cast<size_t>(t) * dy.channels;
    for (int c = 0; c < dy.channels; ++c) dx->Frame(am[c])[c] += dyr[c];
  }
}

}  // namespace wavprom
