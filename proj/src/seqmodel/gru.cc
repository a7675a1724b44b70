// wavprom/seqmodel/gru.cc

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

#include "wavprom/seqmodel/gru.h"

#include <cmath>

#include "wavprom/base/error.h"

namespace wavprom {

double Sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

namespace {

// Orthogonalizes a square matrix in place with modified Gram-Schmidt over
// rows of a Gaussian draw.
void OrthogonalInit(Matrix* m, Rng* rng) {
  for (double& v : m->d) v = rng->Gaussian();
  for (int i = 0; i < m->rows; ++i) {
    double* ri = m->Row(i);
    for (int j = 0; j < i; ++j) {
      const double* rj = m->Row(j);
      double dot = 0.0;
      for (int c = 0; c < m->cols; ++c) dot += ri[c] * rj[c];
      for (int c = 0; c < m->cols; ++c) ri[c] -= dot * rj[c];
    }
    double norm = 0.0;
    for (int c = 0; c < m->cols; ++c) norm += ri[c] * ri[c];
    norm = std::sqrt(norm);
    if (norm < 1e-12) {
      // Degenerate draw; re-randomize this row and retry once.
      for (int c = 0; c < m->cols; ++c) ri[c] = rng->Gaussian();
      --i;
      continue;
    }
    for (int c = 0; c < m->cols; ++c) ri[c] /= norm;
  }
}

void ApplyDropout(Matrix* x, int valid_len, double p, Rng* rng, Matrix* mask) {
  *mask = Matrix(x->rows, x->cols);
  const double keep = 1.0 - p;
  for (int t = 0; t < valid_len; ++t) {
    double* xr = x->Row(t);
    double* mr = mask->Row(t);
    for (int c = 0; c < x->cols; ++c) {
      mr[c] = rng->Uniform() < p ? 0.0 : 1.0 / keep;
      xr[c] *= mr[c];
    }
  }
}

}  // namespace

GruCell::GruCell(int input_dim, int hidden_dim, Rng* init)
    : input_dim_(input_dim),
      hidden_dim_(hidden_dim),
      w_i_(3 * hidden_dim, input_dim),
      w_h_(3 * hidden_dim, hidden_dim),
      b_i_(3 * hidden_dim, 0.0),
      b_h_(3 * hidden_dim, 0.0),
      grad_w_i_(3 * hidden_dim, input_dim),
      grad_w_h_(3 * hidden_dim, hidden_dim),
      grad_b_i_(3 * hidden_dim, 0.0),
      grad_b_h_(3 * hidden_dim, 0.0) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
  for (double& w : w_i_.d) w = init->Uniform(-bound, bound);
  for (int g = 0; g < 3; ++g) {
    Matrix gate(hidden_dim, hidden_dim);
    OrthogonalInit(&gate, init);
    for (int r = 0; r < hidden_dim; ++r)
      for (int c = 0; c < hidden_dim; ++c)
        w_h_.At(g * hidden_dim + r, c) = gate.At(r, c);
  }
}

void GruCell::Step(const double* x, const Vector& h_prev, Vector* h_out,
                   StepCache* cache) const {
  const int h = hidden_dim_;
  Vector a_i(3 * h), a_h(3 * h);
  MatVec(w_i_, x, a_i.data(), false);
  MatVec(w_h_, h_prev.data(), a_h.data(), false);
  for (int i = 0; i < 3 * h; ++i) {
    a_i[i] += b_i_[i];
    a_h[i] += b_h_[i];
  }

  cache->r.resize(h);
  cache->z.resize(h);
  cache->n.resize(h);
  cache->m.resize(h);
  cache->h_prev = h_prev;
  h_out->resize(h);
  for (int i = 0; i < h; ++i) {
    double r = Sigmoid(a_i[i] + a_h[i]);
    double z = Sigmoid(a_i[h + i] + a_h[h + i]);
    double m = a_h[2 * h + i];
    double n = std::tanh(a_i[2 * h + i] + r * m);
    cache->r[i] = r;
    cache->z[i] = z;
    cache->m[i] = m;
    cache->n[i] = n;
    (*h_out)[i] = (1.0 - z) * n + z * h_prev[i];
  }
}

void GruCell::StepBackward(const double* x, const StepCache& cache, Vector* dh,
                           double* dx) {
  const int h = hidden_dim_;
  Vector da_i(3 * h), da_h(3 * h);
  Vector dh_prev(h, 0.0);
  for (int i = 0; i < h; ++i) {
    const double r = cache.r[i], z = cache.z[i], n = cache.n[i], m = cache.m[i];
    const double dhi = (*dh)[i];
    const double dn = dhi * (1.0 - z);
    const double dan = dn * (1.0 - n * n);
    const double dz = dhi * (cache.h_prev[i] - n);
    const double daz = dz * z * (1.0 - z);
    const double dm = dan * r;
    const double dr = dan * m;
    const double dar = dr * r * (1.0 - r);
    da_i[i] = dar;
    da_i[h + i] = daz;
    da_i[2 * h + i] = dan;
    da_h[i] = dar;
    da_h[h + i] = daz;
    da_h[2 * h + i] = dm;
    dh_prev[i] = dhi * z;
  }

  for (int i = 0; i < 3 * h; ++i) {
    grad_b_i_[i] += da_i[i];
    grad_b_h_[i] += da_h[i];
  }
  AddOuter(&grad_w_i_, da_i.data(), x);
  AddOuter(&grad_w_h_, da_h.data(), cache.h_prev.data());
  MatTVecAdd(w_i_, da_i.data(), dx);
  MatTVecAdd(w_h_, da_h.data(), dh_prev.data());
  *dh = std::move(dh_prev);
}

void GruCell::VisitParams(const std::string& prefix, const ParamVisitor& visit) {
  visit({prefix + "w_i", w_i_.d.data(), grad_w_i_.d.data(),
         static_cast<int64_t>(w_i_.Size()), true});
  visit({prefix + "w_h", w_h_.d.data(), grad_w_h_.d.data(),
         static_cast<int64_t>(w_h_.Size()), true});
  visit({prefix + "b_i", b_i_.data(), grad_b_i_.data(),
         static_cast<int64_t>(b_i_.size()), true});
  visit({prefix + "b_h", b_h_.data(), grad_b_h_.data(),
         static_cast<int64_t>(b_h_.size()), true});
}

GruStack::GruStack(int input_dim, const SequenceHeadSpec& spec, Rng* init)
    : input_dim_(input_dim),
      hidden_(spec.gru_hidden),
      layers_(spec.gru_layers),
      bidirectional_(spec.bidirectional),
      dropout_(spec.inter_layer_dropout) {
  WAVPROM_REQUIRE(layers_ >= 1 && hidden_ >= 1, "gru: layers and hidden must be positive");
  WAVPROM_REQUIRE(dropout_ >= 0.0 && dropout_ < 1.0, "gru: dropout must be in [0,1)");
  int dim = input_dim;
  for (int l = 0; l < layers_; ++l) {
    std::vector<std::unique_ptr<GruCell>> dirs;
    dirs.push_back(std::make_unique<GruCell>(dim, hidden_, init));
    if (bidirectional_) dirs.push_back(std::make_unique<GruCell>(dim, hidden_, init));
    cells_.push_back(std::move(dirs));
    dim = OutputDim();
  }
}

Matrix GruStack::Forward(const Matrix& inputs, int valid_len,
                         const PassContext& ctx, Cache* cache) const {
  WAVPROM_REQUIRE(inputs.cols == input_dim_, "gru: expected input dim ",
                  input_dim_, ", got ", inputs.cols);
  WAVPROM_REQUIRE(valid_len >= 1 && valid_len <= inputs.rows,
                  "gru: invalid valid_len ", valid_len);
  const int t_total = inputs.rows;
  const int dirs = bidirectional_ ? 2 : 1;

  cache->valid_len = valid_len;
  cache->steps.assign(layers_, {});
  cache->layer_inputs.clear();
  cache->dropout_masks.assign(layers_ > 0 ? layers_ - 1 : 0, Matrix());

  Matrix layer_in = inputs;
  Matrix layer_out;
  for (int l = 0; l < layers_; ++l) {
    cache->layer_inputs.push_back(layer_in);
    layer_out = Matrix(t_total, OutputDim());
    cache->steps[l].assign(dirs, std::vector<GruCell::StepCache>(valid_len));
    for (int d = 0; d < dirs; ++d) {
      const GruCell& cell = *cells_[l][d];
      Vector h(hidden_, 0.0), h_next;
      for (int s = 0; s < valid_len; ++s) {
        int t = d == 0 ? s : valid_len - 1 - s;
        cell.Step(layer_in.Row(t), h, &h_next, &cache->steps[l][d][s]);
        double* out = layer_out.Row(t) + d * hidden_;
        for (int i = 0; i < hidden_; ++i) out[i] = h_next[i];
        h = h_next;
      }
    }
    if (l + 1 < layers_) {
      if (ctx.training && dropout_ > 0.0) {
        WAVPROM_REQUIRE(ctx.dropout_rng != nullptr,
                        "gru: training mode requires a dropout rng");
        ApplyDropout(&layer_out, valid_len, dropout_, ctx.dropout_rng,
                     &cache->dropout_masks[l]);
      }
      layer_in = layer_out;
    }
  }
  return layer_out;
}

Matrix GruStack::Backward(const Matrix& d_outputs, const Cache& cache) {
  const int t_total = d_outputs.rows;
  const int valid_len = cache.valid_len;
  const int dirs = bidirectional_ ? 2 : 1;

  Matrix dlayer_out = d_outputs;
  for (int l = layers_ - 1; l >= 0; --l) {
    const Matrix& layer_in = cache.layer_inputs[l];
    Matrix dlayer_in(t_total, layer_in.cols);
    for (int d = 0; d < dirs; ++d) {
      GruCell& cell = *cells_[l][d];
      Vector dh(hidden_, 0.0);
      for (int s = valid_len - 1; s >= 0; --s) {
        int t = d == 0 ? s : valid_len - 1 - s;
        const double* dout = dlayer_out.Row(t) + d * hidden_;
        for (int i = 0; i < hidden_; ++i) dh[i] += dout[i];
        cell.StepBackward(layer_in.Row(t), cache.steps[l][d][s], &dh,
                          dlayer_in.Row(t));
      }
    }
    if (l > 0) {
      const Matrix& mask = cache.dropout_masks[l - 1];
      if (mask.rows > 0)
        for (size_t i = 0; i < dlayer_in.d.size(); ++i)
          dlayer_in.d[i] *= mask.d[i];
    }
    dlayer_out = std::move(dlayer_in);
  }
  return dlayer_out;
}

void GruStack::VisitParams(const std::string& prefix, const ParamVisitor& visit) {
  for (int l = 0; l < layers_; ++l)
    for (size_t d = 0; d < cells_[l].size(); ++d)
      cells_[l][d]->VisitParams(
          StrCat(prefix, "l", l, d == 0 ? ".fwd." : ".bwd."), visit);
}

DenseHead::DenseHead(int input_dim, int fc1_dim, double dropout, Rng* init)
    : input_dim_(input_dim),
      fc1_dim_(fc1_dim),
      dropout_(dropout),
      w1_(fc1_dim, input_dim),
      b1_(fc1_dim, 0.0),
      w2_(1, fc1_dim),
      b2_(1, 0.0),
      grad_w1_(fc1_dim, input_dim),
      grad_b1_(fc1_dim, 0.0),
      grad_w2_(1, fc1_dim),
      grad_b2_(1, 0.0) {
  WAVPROM_REQUIRE(fc1_dim >= 1, "dense head: fc1_dim must be positive");
  WAVPROM_REQUIRE(dropout >= 0.0 && dropout < 1.0, "dense head: dropout in [0,1)");
  double bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
  for (double& w : w1_.d) w = init->Uniform(-bound, bound);
  bound = 1.0 / std::sqrt(static_cast<double>(fc1_dim));
  for (double& w : w2_.d) w = init->Uniform(-bound, bound);
}

Vector DenseHead::Forward(const Matrix& hidden, int valid_len,
                          const PassContext& ctx, Cache* cache) const {
  WAVPROM_REQUIRE(hidden.cols == input_dim_, "dense head: expected dim ",
                  input_dim_, ", got ", hidden.cols);
  cache->inputs = &hidden;
  cache->a1 = Matrix(hidden.rows, fc1_dim_);
  cache->drop_mask = Matrix(hidden.rows, fc1_dim_);
  cache->relu_mask.assign(static_cast<size_t>(hidden.rows) * fc1_dim_, false);
  Vector scores(static_cast<size_t>(hidden.rows), 0.0);

  const double keep = 1.0 - dropout_;
  for (int t = 0; t < valid_len; ++t) {
    double* a1 = cache->a1.Row(t);
    double* mask = cache->drop_mask.Row(t);
    MatVec(w1_, hidden.Row(t), a1, false);
    for (int i = 0; i < fc1_dim_; ++i) {
      a1[i] += b1_[i];
      if (a1[i] > 0.0) {
        cache->relu_mask[static_cast<size_t>(t) * fc1_dim_ + i] = true;
      } else {
        a1[i] = 0.0;
      }
      if (ctx.training && dropout_ > 0.0) {
        WAVPROM_REQUIRE(ctx.dropout_rng != nullptr,
                        "dense head: training mode requires a dropout rng");
        mask[i] = ctx.dropout_rng->Uniform() < dropout_ ? 0.0 : 1.0 / keep;
        a1[i] *= mask[i];
      } else {
        mask[i] = 1.0;
      }
    }
    double logit = b2_[0];
    const double* w2 = w2_.Row(0);
    for (int i = 0; i < fc1_dim_; ++i) logit += w2[i] * a1[i];
    scores[t] = Sigmoid(logit);
  }
  cache->scores = scores;
  return scores;
}

Matrix DenseHead::Backward(const Vector& dscores, const Cache& cache) {
  const Matrix& hidden = *cache.inputs;
  Matrix dhidden(hidden.rows, hidden.cols);
  Vector da1(fc1_dim_);
  for (int t = 0; t < static_cast<int>(dscores.size()); ++t) {
    if (dscores[t] == 0.0) continue;
    const double s = cache.scores[t];
    const double dlogit = dscores[t] * s * (1.0 - s);
    grad_b2_[0] += dlogit;
    const double* a1 = cache.a1.Row(t);
    const double* mask = cache.drop_mask.Row(t);
    double* gw2 = grad_w2_.Row(0);
    const double* w2 = w2_.Row(0);
    for (int i = 0; i < fc1_dim_; ++i) {
      gw2[i] += dlogit * a1[i];
      double d = dlogit * w2[i] * mask[i];
      if (!cache.relu_mask[static_cast<size_t>(t) * fc1_dim_ + i]) d = 0.0;
      da1[i] = d;
      grad_b1_[i] += d;
    }
    AddOuter(&grad_w1_, da1.data(), hidden.Row(t));
    MatTVecAdd(w1_, da1.data(), dhidden.Row(t));
  }
  return dhidden;
}

void DenseHead::VisitParams(const std::string& prefix, const ParamVisitor& visit) {
  visit({prefix + "w1", w1_.d.data(), grad_w1_.d.data(),
         static_cast<int64_t>(w1_.Size()), true});
  visit({prefix + "b1", b1_.data(), grad_b1_.data(),
         static_cast<int64_t>(b1_.size()), true});
  visit({prefix + "w2", w2_.d.data(), grad_w2_.d.data(),
         static_cast<int64_t>(w2_.Size()), true});
  visit({prefix + "b2", b2_.data(), grad_b2_.data(),
         static_cast<int64_t>(b2_.size()), true});
}

}  // namespace wavprom
