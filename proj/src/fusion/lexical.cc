// wavprom/fusion/lexical.cc

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

#include "wavprom/fusion/lexical.h"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "wavprom/base/error.h"

namespace wavprom {

std::string NormalizeToken(const std::string& token) {
  std::string out;
  out.reserve(token.size());
  for (char c : token) {
    if (std::ispunct(static_cast<unsigned char>(c))) continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

LexicalTable::LexicalTable(int embedding_dim) : dim_(embedding_dim) {}

LexicalTable::LexicalTable(const std::string& path, int embedding_dim)
    : dim_(embedding_dim) {
  std::ifstream in(path);
  if (!in) ThrowValidation("cannot open embeddings file: ", path);
  std::vector<Vector> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string token;
    ss >> token;
    Vector v;
    v.reserve(dim_);
    double x;
    while (ss >> x) v.push_back(x);
    if (static_cast<int>(v.size()) != dim_)
      ThrowValidation("embeddings line ", line_no, ": token '", token, "' has ",
                      v.size(), " dims, expected ", dim_);
    std::string norm = NormalizeToken(token);
    if (norm.empty() || index_.count(norm)) continue;  // keep first occurrence
    index_[norm] = static_cast<int>(rows.size());
    rows.push_back(std::move(v));
  }
  vectors_ = Matrix(static_cast<int>(rows.size()), dim_);
  for (size_t r = 0; r < rows.size(); ++r)
    std::copy(rows[r].begin(), rows[r].end(), vectors_.Row(static_cast<int>(r)));
}

const double* LexicalTable::Lookup(const std::string& token) const {
  auto it = index_.find(NormalizeToken(token));
  if (it == index_.end()) return nullptr;
  return vectors_.Row(it->second);
}

LexicalProjector::LexicalProjector(const LexicalSpec& spec, Rng* init)
    : spec_(spec),
      w_(spec.projection_dim, spec.embedding_dim),
      b_(spec.projection_dim, 0.0),
      grad_w_(spec.projection_dim, spec.embedding_dim),
      grad_b_(spec.projection_dim, 0.0) {
  WAVPROM_REQUIRE(spec.embedding_dim >= 1 && spec.projection_dim >= 1,
                  "lexical: dims must be positive");
  WAVPROM_REQUIRE(spec.dropout >= 0.0 && spec.dropout < 1.0,
                  "lexical: dropout must be in [0,1)");
  const double bound = 1.0 / std::sqrt(static_cast<double>(spec.embedding_dim));
  for (double& w : w_.d) w = init->Uniform(-bound, bound);
}

Matrix LexicalProjector::Forward(const std::vector<std::string>& tokens,
                                 const LexicalTable& table, const PassContext& ctx,
                                 Cache* cache) const {
  const int t_total = static_cast<int>(tokens.size());
  const int d = spec_.embedding_dim;
  WAVPROM_REQUIRE(table.dim() == d, "lexical: table dim ", table.dim(),
                  " != spec dim ", d);
  cache->dropped = Matrix(t_total, d);
  Matrix out(t_total, spec_.projection_dim);
  const double keep = 1.0 - spec_.dropout;
  for (int t = 0; t < t_total; ++t) {
    double* x = cache->dropped.Row(t);
    const double* v = table.Lookup(tokens[t]);
    if (v != nullptr)
      std::copy(v, v + d, x);  // OOV leaves the zero vector
    if (ctx.training && spec_.dropout > 0.0) {
      WAVPROM_REQUIRE(ctx.dropout_rng != nullptr,
                      "lexical: training mode requires a dropout rng");
      for (int i = 0; i < d; ++i)
        x[i] = ctx.dropout_rng->Uniform() < spec_.dropout ? 0.0 : x[i] / keep;
    }
    MatVec(w_, x, out.Row(t), false);
    for (int i = 0; i < spec_.projection_dim; ++i) out.Row(t)[i] += b_[i];
  }
  return out;
}

void LexicalProjector::Backward(const Matrix& d_out, const Cache& cache) {
  for (int t = 0; t < d_out.rows; ++t) {
    const double* g = d_out.Row(t);
    AddOuter(&grad_w_, g, cache.dropped.Row(t));
    for (int i = 0; i < spec_.projection_dim; ++i) grad_b_[i] += g[i];
  }
}

void LexicalProjector::VisitParams(const std::string& prefix,
                                   const ParamVisitor& visit) {
  visit({prefix + "w", w_.d.data(), grad_w_.d.data(),
         static_cast<int64_t>(w_.Size()), true});
  visit({prefix + "b", b_.data(), grad_b_.data(),
         static_cast<int64_t>(b_.size()), true});
}

}  // namespace wavprom
