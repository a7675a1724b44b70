// wavprom/tests/gru-test.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "wavprom/base/error.h"
#include "wavprom/base/rng.h"
#include "wavprom/seqmodel/gru.h"

using namespace wavprom;

namespace {

SequenceHeadSpec TinyHead() {
  SequenceHeadSpec spec;
  spec.gru_layers = 2;
  spec.gru_hidden = 6;
  spec.bidirectional = true;
  spec.inter_layer_dropout = 0.0;
  spec.fc1_dim = 5;
  spec.fc1_dropout = 0.0;
  return spec;
}

Matrix RandomInputs(int t, int d, uint64_t seed) {
  Rng rng(seed);
  Matrix m(t, d);
  for (auto& v : m.d) v = rng.Uniform(-1.0, 1.0);
  return m;
}

}  // namespace

TEST_CASE("default head spec matches the tuned recipe") {
  SequenceHeadSpec spec;
  CHECK(spec.gru_layers == 3);
  CHECK(spec.gru_hidden == 256);
  CHECK(spec.bidirectional);
  CHECK(spec.inter_layer_dropout == 0.5);
  CHECK(spec.fc1_dim == 128);
}

TEST_CASE("sequence of length 1 produces one hidden vector") {
  Rng init(1);
  SequenceHeadSpec spec = TinyHead();
  GruStack gru(4, spec, &init);
  CHECK(gru.OutputDim() == 12);
  Matrix in = RandomInputs(1, 4, 2);
  PassContext ctx;
  GruStack::Cache cache;
  Matrix out = gru.Forward(in, 1, ctx, &cache);
  REQUIRE(out.rows == 1);
  REQUIRE(out.cols == 12);
}

TEST_CASE("inference is deterministic") {
  Rng init(3);
  GruStack gru(4, TinyHead(), &init);
  Matrix in = RandomInputs(5, 4, 4);
  PassContext ctx;
  GruStack::Cache c1, c2;
  Matrix a = gru.Forward(in, 5, ctx, &c1);
  Matrix b = gru.Forward(in, 5, ctx, &c2);
  CHECK(a.d == b.d);
}

TEST_CASE("padded positions do not influence valid outputs") {
  // The masking oracle: a 3-word utterance padded to 5 must match its
  // unpadded run row for row.
  Rng init(5);
  GruStack gru(4, TinyHead(), &init);
  Matrix in3 = RandomInputs(3, 4, 6);
  Matrix in5(5, 4);
  for (int t = 0; t < 3; ++t)
    for (int c = 0; c < 4; ++c) in5.At(t, c) = in3.At(t, c);
  in5.At(3, 0) = 99.0;  // garbage in the padding
  in5.At(4, 1) = -99.0;

  PassContext ctx;
  GruStack::Cache c1, c2;
  Matrix out3 = gru.Forward(in3, 3, ctx, &c1);
  Matrix out5 = gru.Forward(in5, 3, ctx, &c2);
  for (int t = 0; t < 3; ++t)
    for (int c = 0; c < out3.cols; ++c)
      CHECK(std::fabs(out3.At(t, c) - out5.At(t, c)) < 1e-6);
  for (int c = 0; c < out5.cols; ++c) {
    CHECK(out5.At(3, c) == 0.0);
    CHECK(out5.At(4, c) == 0.0);
  }
}

TEST_CASE("ragged input dimensions are rejected") {
  Rng init(7);
  GruStack gru(4, TinyHead(), &init);
  Matrix in = RandomInputs(3, 5, 8);
  PassContext ctx;
  GruStack::Cache cache;
  CHECK_THROWS_AS(gru.Forward(in, 3, ctx, &cache), ValidationError);
}

TEST_CASE("dense head: zero weights give the sigmoid midpoint") {
  Rng init(9);
  DenseHead head(12, 5, 0.0, &init);
  head.VisitParams("", [](const ParamRef& ref) {
    std::fill(ref.value, ref.value + ref.size, 0.0);
  });
  Matrix hidden = RandomInputs(2, 12, 10);
  PassContext ctx;
  DenseHead::Cache cache;
  Vector scores = head.Forward(hidden, 2, ctx, &cache);
  CHECK(scores[0] == doctest::Approx(0.5));
  CHECK(scores[1] == doctest::Approx(0.5));
}

TEST_CASE("dense head scores stay strictly inside (0,1)") {
  Rng init(11);
  DenseHead head(8, 4, 0.0, &init);
  Matrix hidden = RandomInputs(20, 8, 12);
  for (auto& v : hidden.d) v *= 50.0;  // extreme inputs
  PassContext ctx;
  DenseHead::Cache cache;
  Vector scores = head.Forward(hidden, 20, ctx, &cache);
  for (double s : scores) {
    CHECK(s > 0.0);
    CHECK(s < 1.0);
  }
}

TEST_CASE("raising the output bias strictly raises the score") {
  Rng init(13);
  DenseHead head(8, 4, 0.0, &init);
  Matrix hidden = RandomInputs(1, 8, 14);
  PassContext ctx;
  DenseHead::Cache cache;
  double s0 = head.Forward(hidden, 1, ctx, &cache)[0];
  (*head.mutable_b2())[0] += 0.5;
  double s1 = head.Forward(hidden, 1, ctx, &cache)[0];
  CHECK(s1 > s0);
}

TEST_CASE("bidirectional context carries gradient to earlier words") {
  // Supervising only word 2 of a 2-word utterance must still produce a
  // nonzero gradient at word 1's input.
  Rng init(15);
  SequenceHeadSpec spec = TinyHead();
  GruStack gru(4, spec, &init);
  DenseHead head(gru.OutputDim(), 5, 0.0, &init);

  Matrix in = RandomInputs(2, 4, 16);
  PassContext ctx;
  GruStack::Cache gc;
  DenseHead::Cache hc;
  Matrix hidden = gru.Forward(in, 2, ctx, &gc);
  Vector scores = head.Forward(hidden, 2, ctx, &hc);
  Vector dscores = {0.0, 1.0};  // only word 2 supervised
  Matrix dhidden = head.Backward(dscores, hc);
  Matrix din = gru.Backward(dhidden, gc);
  double norm = 0.0;
  for (int c = 0; c < din.cols; ++c) norm += std::fabs(din.At(0, c));
  CHECK(norm > 1e-12);
}

TEST_CASE("gru and head gradients match finite differences") {
  Rng init(17);
  SequenceHeadSpec spec = TinyHead();
  GruStack gru(3, spec, &init);
  DenseHead head(gru.OutputDim(), 5, 0.0, &init);
  Matrix in = RandomInputs(4, 3, 18);
  Vector targets = {0.2, 0.8, 0.5, 0.1};
  PassContext ctx;

  auto loss_of = [&]() {
    GruStack::Cache gc;
    DenseHead::Cache hc;
    Matrix hidden = gru.Forward(in, 4, ctx, &gc);
    Vector scores = head.Forward(hidden, 4, ctx, &hc);
    double loss = 0.0;
    for (int t = 0; t < 4; ++t)
      loss += 0.5 * (scores[t] - targets[t]) * (scores[t] - targets[t]);
    return loss;
  };

  GruStack::Cache gc;
  DenseHead::Cache hc;
  Matrix hidden = gru.Forward(in, 4, ctx, &gc);
  Vector scores = head.Forward(hidden, 4, ctx, &hc);
  Vector dscores(4);
  for (int t = 0; t < 4; ++t) dscores[t] = scores[t] - targets[t];
  Matrix dhidden = head.Backward(dscores, hc);
  gru.Backward(dhidden, gc);

  struct Entry {
    std::string name;
    double* value;
    double* grad;
    int64_t size;
  };
  std::vector<Entry> entries;
  auto collect = [&](const ParamRef& ref) {
    entries.push_back({ref.name, ref.value, ref.grad, ref.size});
  };
  gru.VisitParams("gru.", collect);
  head.VisitParams("head.", collect);

  Rng pick(19);
  const double h = 1e-6;
  for (const auto& e : entries) {
    for (int rep = 0; rep < 2; ++rep) {
      int64_t i = pick.UniformInt(0, e.size - 1);
      double saved = e.value[i];
      e.value[i] = saved + h;
      double lp = loss_of();
      e.value[i] = saved - h;
      double lm = loss_of();
      e.value[i] = saved;
      double fd = (lp - lm) / (2.0 * h);
      double denom = std::max({std::fabs(fd), std::fabs(e.grad[i]), 1e-9});
      INFO("tensor ", e.name, " index ", i);
      CHECK(std::fabs(fd - e.grad[i]) / denom < 1e-4);
    }
  }
}

TEST_CASE("dropout is active only in training mode") {
  Rng init(21);
  SequenceHeadSpec spec = TinyHead();
  spec.inter_layer_dropout = 0.5;
  GruStack gru(4, spec, &init);
  Matrix in = RandomInputs(6, 4, 22);

  Rng drop_a(1), drop_b(2);
  PassContext train_a{true, &drop_a}, train_b{true, &drop_b};
  GruStack::Cache c1, c2;
  Matrix a = gru.Forward(in, 6, train_a, &c1);
  Matrix b = gru.Forward(in, 6, train_b, &c2);
  CHECK(a.d != b.d);  // different masks

  PassContext infer;
  GruStack::Cache c3, c4;
  Matrix x = gru.Forward(in, 6, infer, &c3);
  Matrix y = gru.Forward(in, 6, infer, &c4);
  CHECK(x.d == y.d);
}
