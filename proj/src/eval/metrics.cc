// wavprom/eval/metrics.cc

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

#include "wavprom/eval/metrics.h"

#include <cmath>

#include "wavprom/base/error.h"

namespace wavprom {

double Pearson(const std::vector<double>& pred, const std::vector<double>& truth) {
  if (pred.size() != truth.size())
    ThrowValidation("pearson: length mismatch (", pred.size(), " vs ", truth.size(), ")");
  const size_t n = pred.size();
  if (n < 2) ThrowValidation("pearson: need at least 2 points, got ", n);

  double mean_p = 0.0, mean_t = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mean_p += pred[i];
    mean_t += truth[i];
  }
  mean_p /= static_cast<double>(n);
  mean_t /= static_cast<double>(n);

  double spp = 0.0, stt = 0.0, spt = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const double dp = pred[i] - mean_p;
    const double dt = truth[i] - mean_t;
    spp += dp * dp;
    stt += dt * dt;
    spt += dp * dt;
  }
  if (spp == 0.0 || stt == 0.0)
    ThrowValidation("pearson: undefined for a constant input vector");
  return spt / std::sqrt(spp * stt);
}

std::pair<double, double> FoldSummary(const std::vector<double>& per_fold_r) {
  if (per_fold_r.empty()) ThrowValidation("fold_summary: empty fold list");
  const size_t n = per_fold_r.size();
  double mean = 0.0;
  for (double r : per_fold_r) mean += r;
  mean /= static_cast<double>(n);
  if (n == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double r : per_fold_r) ss += (r - mean) * (r - mean);
  return {mean, std::sqrt(ss / static_cast<double>(n - 1))};
}

}  // namespace wavprom
