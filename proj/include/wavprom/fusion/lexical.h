// wavprom/fusion/lexical.h

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

#ifndef WAVPROM_FUSION_LEXICAL_H_
#define WAVPROM_FUSION_LEXICAL_H_

#include <string>
#include <unordered_map>

#include "wavprom/base/matrix.h"
#include "wavprom/base/params.h"
#include "wavprom/base/rng.h"

namespace wavprom {

struct LexicalSpec {
  int embedding_dim = 100;
  int projection_dim = 300;
  double dropout = 0.3;
  std::string vocabulary_path;
};

/// Lowercases and strips punctuation for embedding lookup.
std::string NormalizeToken(const std::string& token);

// Frozen pretrained word vectors: text format, one token per line followed by
// embedding_dim whitespace-separated reals. Out-of-vocabulary tokens map to
// the zero vector.
class LexicalTable {
 public:
  LexicalTable(const std::string& path, int embedding_dim);
  // Empty table: every token is out-of-vocabulary.
  explicit LexicalTable(int embedding_dim);

  /// Pointer to the token's vector, or null when out of vocabulary.
  const double* Lookup(const std::string& token) const;
  int dim() const { return dim_; }
  int size() const { return static_cast<int>(index_.size()); }

 private:
  int dim_;
  Matrix vectors_;
  std::unordered_map<std::string, int> index_;
};

// Trainable projection on top of the frozen table: dropout on the embedding
// (training only) followed by a linear map to projection_dim.
class LexicalProjector {
 public:
  LexicalProjector(const LexicalSpec& spec, Rng* init);

  struct Cache {
    Matrix dropped;  // T x embedding_dim inputs after dropout
  };

  /// tokens -> T x projection_dim.
  Matrix Forward(const std::vector<std::string>& tokens, const LexicalTable& table,
                 const PassContext& ctx, Cache* cache) const;
  void Backward(const Matrix& d_out, const Cache& cache);

  void VisitParams(const std::string& prefix, const ParamVisitor& visit);
  int projection_dim() const { return spec_.projection_dim; }

 private:
  LexicalSpec spec_;
  Matrix w_;  // projection_dim x embedding_dim
  Vector b_;
  Matrix grad_w_;
  Vector grad_b_;
};

}  // namespace wavprom

#endif  // WAVPROM_FUSION_LEXICAL_H_
