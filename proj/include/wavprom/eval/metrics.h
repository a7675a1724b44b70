// wavprom/eval/metrics.h

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

#ifndef WAVPROM_EVAL_METRICS_H_
#define WAVPROM_EVAL_METRICS_H_

#include <utility>
#include <vector>

namespace wavprom {

/// Sample Pearson correlation coefficient. Requires equal lengths >= 2 and
/// that neither vector is constant; a constant input throws rather than
/// silently returning 0.
double Pearson(const std::vector<double>& pred, const std::vector<double>& truth);

/// Mean and sample standard deviation (n-1 denominator) of per-fold scores.
/// For a single fold the deviation is reported as 0.
std::pair<double, double> FoldSummary(const std::vector<double>& per_fold_r);

}  // namespace wavprom

#endif  // WAVPROM_EVAL_METRICS_H_
