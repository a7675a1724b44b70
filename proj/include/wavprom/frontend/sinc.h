// wavprom/frontend/sinc.h

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

#ifndef WAVPROM_FRONTEND_SINC_H_
#define WAVPROM_FRONTEND_SINC_H_

#include <string>

#include "wavprom/base/matrix.h"
#include "wavprom/base/params.h"

namespace wavprom {

// Learnable band-pass filterbank parameters. Frequencies are normalized
// (cycles per sample). The raw values are unconstrained; kernel construction
// reparameterizes with f1 = |f_low| and f2 = min(f1 + |band|, 0.5), so
// gradient steps can never produce an invalid band.
struct SincFilterbankParams {
  Vector f_low;
  Vector band;
  int num_filters = 32;
  int kernel_width = 31;  // odd; 51 for the wide variant
  int stride = 2;         // 1 for the wide variant
};

/// Mel-spaced initialization (m = 2595 log10(1 + f/700)): num_filters + 2
/// equally spaced mel points between f_min and f_max; filter i spans
/// [point_i, point_{i+2}], so adjacent filters overlap by construction.
SincFilterbankParams MelInit(int num_filters, double sample_rate_hz,
                             double f_min_hz = 30.0, double f_max_hz = -1.0,
                             int kernel_width = 31, int stride = 2);

/// Effective cutoffs after reparameterization, in cycles/sample.
void EffectiveCutoffs(const SincFilterbankParams& params, int filter,
                      double* f1, double* f2);

/// Builds the kernel bank (num_filters x kernel_width): difference of two
/// windowed ideal low-pass sinc kernels,
///   g[n] = 2 f2 sinc(2 pi f2 n) - 2 f1 sinc(2 pi f1 n),
/// n symmetric about 0, multiplied by a Hamming window. Each kernel is even
/// and differentiable in f_low and band.
Matrix BuildSincKernels(const SincFilterbankParams& params);

/// Magnitude response |H(f)| of one kernel at num_bins frequencies uniformly
/// spanning [0, 0.5] cycles/sample (zero-padded DFT evaluated directly).
Vector KernelMagnitudeResponse(const double* kernel, int width, int num_bins);

// First convolutional layer with sinc-constrained kernels: single input
// channel, no additive bias (batch normalization follows). Gradients are
// chained through the kernel construction back to f_low and band.
class SincConv {
 public:
  explicit SincConv(const SincFilterbankParams& params);

  struct Cache {
    Matrix kernels;  // as used in the forward pass
  };

  // x: raw samples; y: frames x num_filters.
  void Forward(const Vector& x, struct FeatureMap* y, Cache* cache) const;
  // Accumulates parameter gradients. No input gradient: this is layer 1.
  void Backward(const Vector& x, const struct FeatureMap& dy, const Cache& cache);

  void VisitParams(const std::string& prefix, const ParamVisitor& visit);
  int OutputFrames(int input_len) const;

  const SincFilterbankParams& params() const { return params_; }
  SincFilterbankParams* mutable_params() { return &params_; }

 private:
  SincFilterbankParams params_;
  Vector grad_f_low_;
  Vector grad_band_;
};

}  // namespace wavprom

#endif  // WAVPROM_FRONTEND_SINC_H_
