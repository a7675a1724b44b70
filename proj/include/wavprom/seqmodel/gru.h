// wavprom/seqmodel/gru.h

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

#ifndef WAVPROM_SEQMODEL_GRU_H_
#define WAVPROM_SEQMODEL_GRU_H_

#include <memory>
#include <string>
#include <vector>

#include "wavprom/base/matrix.h"
#include "wavprom/base/params.h"
#include "wavprom/base/rng.h"

namespace wavprom {

// Word-sequence encoder and scoring head. Defaults follow the tuned recipe:
// 3-layer 256-dimensional bidirectional GRU, dropout 0.5 at every GRU output
// layer except the last, then FC(128) + ReLU + dropout and a sigmoid output
// neuron.
struct SequenceHeadSpec {
  int gru_layers = 3;
  int gru_hidden = 256;
  bool bidirectional = true;
  double inter_layer_dropout = 0.5;
  int fc1_dim = 128;
  double fc1_dropout = 0.5;
};

// One direction of one GRU layer. Standard update/reset gating:
//   r = sigmoid(W_ir x + b_ir + W_hr h + b_hr)
//   z = sigmoid(W_iz x + b_iz + W_hz h + b_hz)
//   n = tanh(W_in x + b_in + r * (W_hn h + b_hn))
//   h' = (1 - z) * n + z * h
// Gate rows are packed [r; z; n]. Recurrent weights are initialized
// orthogonal, input weights uniform with fan-in scaling.
class GruCell {
 public:
  GruCell(int input_dim, int hidden_dim, Rng* init);

  struct StepCache {
    Vector r, z, n, m, h_prev;  // m = W_hn h_prev + b_hn
  };

  void Step(const double* x, const Vector& h_prev, Vector* h_out,
            StepCache* cache) const;
  // Accumulates parameter gradients; adds input gradient into dx and returns
  // the carried dL/dh_prev in dh.
  void StepBackward(const double* x, const StepCache& cache, Vector* dh,
                    double* dx);

  void VisitParams(const std::string& prefix, const ParamVisitor& visit);
  int input_dim() const { return input_dim_; }
  int hidden_dim() const { return hidden_dim_; }

 private:
  int input_dim_, hidden_dim_;
  Matrix w_i_, w_h_;  // 3H x D, 3H x H
  Vector b_i_, b_h_;
  Matrix grad_w_i_, grad_w_h_;
  Vector grad_b_i_, grad_b_h_;
};

class GruStack {
 public:
  GruStack(int input_dim, const SequenceHeadSpec& spec, Rng* init);

  struct Cache {
    // [layer][direction][t]
    std::vector<std::vector<std::vector<GruCell::StepCache>>> steps;
    std::vector<Matrix> layer_inputs;    // input to each layer (post-dropout)
    std::vector<Matrix> dropout_masks;   // between layers, may be empty
    int valid_len = 0;
  };

  /// inputs: T x input_dim; rows at or beyond valid_len are padding and do
  /// not influence the rows before it. Output: T x OutputDim(), padded rows
  /// zero.
  Matrix Forward(const Matrix& inputs, int valid_len, const PassContext& ctx,
                 Cache* cache) const;
  /// d_outputs: T x OutputDim(); returns gradient w.r.t. inputs.
  Matrix Backward(const Matrix& d_outputs, const Cache& cache);

  void VisitParams(const std::string& prefix, const ParamVisitor& visit);
  int OutputDim() const { return hidden_ * (bidirectional_ ? 2 : 1); }
  int input_dim() const { return input_dim_; }

 private:
  int input_dim_;
  int hidden_;
  int layers_;
  bool bidirectional_;
  double dropout_;
  // cells_[layer][direction]
  std::vector<std::vector<std::unique_ptr<GruCell>>> cells_;
};

// FC(fc1_dim) -> ReLU -> dropout -> FC(1) -> sigmoid, applied per word.
class DenseHead {
 public:
  DenseHead(int input_dim, int fc1_dim, double dropout, Rng* init);

  struct Cache {
    Matrix a1;           // T x fc1_dim, post-ReLU post-dropout
    Matrix drop_mask;    // T x fc1_dim
    std::vector<bool> relu_mask;  // T * fc1_dim
    Vector scores;
    const Matrix* inputs = nullptr;
  };

  /// hidden: T x input_dim -> per-word scores, strictly in (0, 1).
  Vector Forward(const Matrix& hidden, int valid_len, const PassContext& ctx,
                 Cache* cache) const;
  Matrix Backward(const Vector& dscores, const Cache& cache);

  void VisitParams(const std::string& prefix, const ParamVisitor& visit);
  int input_dim() const { return input_dim_; }

  Vector* mutable_b2() { return &b2_; }

 private:
  int input_dim_, fc1_dim_;
  double dropout_;
  Matrix w1_;
  Vector b1_;
  Matrix w2_;  // 1 x fc1_dim
  Vector b2_;  // 1
  Matrix grad_w1_;
  Vector grad_b1_;
  Matrix grad_w2_;
  Vector grad_b2_;
};

double Sigmoid(double x);

}  // namespace wavprom

#endif  // WAVPROM_SEQMODEL_GRU_H_
