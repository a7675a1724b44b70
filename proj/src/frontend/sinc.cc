// wavprom/frontend/sinc.cc

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

#include "wavprom/frontend/sinc.h"

#include <cmath>

#include "wavprom/base/error.h"
#include "wavprom/frontend/conv.h"

namespace wavprom {

namespace {

double MelOfHz(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
double HzOfMel(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

double Sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// 2 f sinc(2 pi f n) = sin(2 pi f n) / (pi n) for n != 0, 2 f at n = 0.
double LowPassTap(double f, int n) {
  if (n == 0) return 2.0 * f;
  return std::sin(2.0 * M_PI * f * n) / (M_PI * n);
}

}  // namespace

SincFilterbankParams MelInit(int num_filters, double sample_rate_hz,
                             double f_min_hz, double f_max_hz, int kernel_width,
                             int stride) {
  if (f_max_hz < 0.0) f_max_hz = sample_rate_hz / 2.0;
  WAVPROM_REQUIRE(num_filters >= 1, "mel_init: num_filters must be >= 1");
  WAVPROM_REQUIRE(f_min_hz >= 0.0 && f_min_hz < f_max_hz &&
                      f_max_hz <= sample_rate_hz / 2.0,
                  "mel_init: need 0 <= f_min < f_max <= Nyquist, got [", f_min_hz,
                  ", ", f_max_hz, "] at rate ", sample_rate_hz);
  WAVPROM_REQUIRE(kernel_width >= 3 && kernel_width % 2 == 1,
                  "mel_init: kernel_width must be odd and >= 3");
  WAVPROM_REQUIRE(stride >= 1, "mel_init: stride must be >= 1");

  const double mel_lo = MelOfHz(f_min_hz);
  const double mel_hi = MelOfHz(f_max_hz);
  const int num_points = num_filters + 2;
  const double step = (mel_hi - mel_lo) / (num_points - 1);

  SincFilterbankParams p;
  p.num_filters = num_filters;
  p.kernel_width = kernel_width;
  p.stride = stride;
  p.f_low.resize(num_filters);
  p.band.resize(num_filters);
  for (int i = 0; i < num_filters; ++i) {
    double f1 = HzOfMel(mel_lo + step * i) / sample_rate_hz;
    double f2 = HzOfMel(mel_lo + step * (i + 2)) / sample_rate_hz;
    p.f_low[i] = f1;
    p.band[i] = f2 - f1;
  }
  return p;
}

void EffectiveCutoffs(const SincFilterbankParams& params, int filter,
                      double* f1, double* f2) {
  *f1 = std::fabs(params.f_low[filter]);
  *f2 = *f1 + std::fabs(params.band[filter]);
  if (*f2 > 0.5) *f2 = 0.5;  // Nyquist clamp at kernel construction
}

Matrix BuildSincKernels(const SincFilterbankParams& params) {
  const int w = params.kernel_width;
  const int half = (w - 1) / 2;
  Matrix kernels(params.num_filters, w);
  for (int o = 0; o < params.num_filters; ++o) {
    double f1, f2;
    EffectiveCutoffs(params, o, &f1, &f2);
    double* row = kernels.Row(o);
    for (int k = 0; k < w; ++k) {
      int n = k - half;
      double window = 0.54 + 0.46 * std::cos(2.0 * M_PI * n / w);
      row[k] = window * (LowPassTap(f2, n) - LowPassTap(f1, n));
    }
  }
  return kernels;
}

Vector KernelMagnitudeResponse(const double* kernel, int width, int num_bins) {
  Vector mag(static_cast<size_t>(num_bins), 0.0);
  for (int b = 0; b < num_bins; ++b) {
    double f = 0.5 * b / (num_bins - 1);
    double re = 0.0, im = 0.0;
    for (int k = 0; k < width; ++k) {
      double phase = -2.0 * M_PI * f * k;
      re += kernel[k] * std::cos(phase);
      im += kernel[k] * std::sin(phase);
    }
    mag[b] = std::sqrt(re * re + im * im);
  }
  return mag;
}

SincConv::SincConv(const SincFilterbankParams& params)
    : params_(params),
      grad_f_low_(params.f_low.size(), 0.0),
      grad_band_(params.band.size(), 0.0) {
  WAVPROM_REQUIRE(static_cast<int>(params_.f_low.size()) == params_.num_filters &&
                      static_cast<int>(params_.band.size()) == params_.num_filters,
                  "sinc: parameter vectors must match num_filters");
  WAVPROM_REQUIRE(params_.kernel_width % 2 == 1, "sinc: kernel_width must be odd");
}

int SincConv::OutputFrames(int input_len) const {
  return ConvOutputLength(input_len, params_.kernel_width, params_.stride);
}

void SincConv::Forward(const Vector& x, FeatureMap* y, Cache* cache) const {
  const int len = static_cast<int>(x.size());
  const int w = params_.kernel_width;
  if (len < w)
    ThrowValidation("sinc: input length ", len, " shorter than kernel ", w);
  cache->kernels = BuildSincKernels(params_);

  const int frames = OutputFrames(len);
  const int filters = params_.num_filters;
  EnsureShape(y, frames, filters);
  for (int t = 0; t < frames; ++t) {
    const double* xw = x.data() + static_cast<size_t>(t) * params_.stride;
    double* yr = y->Frame(t);
    for (int o = 0; o < filters; ++o) {
      const double* kr = cache->kernels.Row(o);
      double acc = 0.0;
      for (int k = 0; k < w; ++k) acc += kr[k] * xw[k];
      yr[o] = acc;
    }
  }
}

void SincConv::Backward(const Vector& x, const FeatureMap& dy, const Cache& cache) {
  const int w = params_.kernel_width;
  const int half = (w - 1) / 2;
  const int filters = params_.num_filters;

  // dL/dkernel by correlating the input with the output gradient.
  Matrix dkernel(filters, w);
  for (int t = 0; t < dy.frames; ++t) {
    const double* xw = x.data() + static_cast<size_t>(t) * params_.stride;
    const double* dyr = dy.Frame(t);
    for (int o = 0; o < filters; ++o) {
      const double g = dyr[o];
      if (g == 0.0) continue;
      double* dk = dkernel.Row(o);
      for (int k = 0; k < w; ++k) dk[k] += g * xw[k];
    }
  }

  // Chain through the construction. With h(f)[n] = 2 f sinc(2 pi f n),
  // dh/df = 2 cos(2 pi f n) for every n, so
  //   dg/df2 = w[n] 2 cos(2 pi f2 n),  dg/df1 = -w[n] 2 cos(2 pi f1 n),
  // and the reparameterization contributes sign factors; a Nyquist-clamped f2
  // receives no gradient.
  for (int o = 0; o < filters; ++o) {
    const double f1 = std::fabs(params_.f_low[o]);
    const double f2_raw = f1 + std::fabs(params_.band[o]);
    const bool clamped = f2_raw > 0.5;
    const double f2 = clamped ? 0.5 : f2_raw;
    const double s_low = Sign(params_.f_low[o]);
    const double s_band = Sign(params_.band[o]);

    const double* dk = dkernel.Row(o);
    double df1 = 0.0, df2 = 0.0;
    for (int k = 0; k < w; ++k) {
      int n = k - half;
      double window = 0.54 + 0.46 * std::cos(2.0 * M_PI * n / w);
      double d = dk[k] * window;
      df2 += d * 2.0 * std::cos(2.0 * M_PI * f2 * n);
      df1 -= d * 2.0 * std::cos(2.0 * M_PI * f1 * n);
    }
    if (clamped) df2 = 0.0;
    grad_f_low_[o] += (df1 + df2) * s_low;
    grad_band_[o] += df2 * s_band;
  }
}

void SincConv::VisitParams(const std::string& prefix, const ParamVisitor& visit) {
  visit({prefix + "f_low", params_.f_low.data(), grad_f_low_.data(),
         static_cast<int64_t>(params_.f_low.size()), true});
  visit({prefix + "band", params_.band.data(), grad_band_.data(),
         static_cast<int64_t>(params_.band.size()), true});
}

}  // namespace wavprom
