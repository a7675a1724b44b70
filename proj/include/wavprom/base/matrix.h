// wavprom/base/matrix.h

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

#ifndef WAVPROM_BASE_MATRIX_H_
#define WAVPROM_BASE_MATRIX_H_

#include <cassert>
#include <vector>

namespace wavprom {

using Vector = std::vector<double>;

// Dense row-major matrix of doubles. Deliberately minimal: the model code
// needs matvec products, outer-product accumulation and row views, nothing
// more.
struct Matrix {
  int rows = 0;
  int cols = 0;
  Vector d;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), d(static_cast<size_t>(r) * c, 0.0) {}

  double* Row(int r) { return d.data() + static_cast<size_t>(r) * cols; }
  const double* Row(int r) const { return d.data() + static_cast<size_t>(r) * cols; }
  double& At(int r, int c) { return d[static_cast<size_t>(r) * cols + c]; }
  double At(int r, int c) const { return d[static_cast<size_t>(r) * cols + c]; }
  size_t Size() const { return d.size(); }
  void SetZero() { std::fill(d.begin(), d.end(), 0.0); }
};

// y (+)= W x
inline void MatVec(const Matrix& w, const double* x, double* y, bool accumulate) {
  for (int r = 0; r < w.rows; ++r) {
    const double* wr = w.Row(r);
    double acc = 0.0;
    for (int c = 0; c < w.cols; ++c) acc += wr[c] * x[c];
    y[r] = accumulate ? y[r] + acc : acc;
  }
}

// y += W^T x  (x has w.rows entries, y has w.cols entries)
inline void MatTVecAdd(const Matrix& w, const double* x, double* y) {
  for (int r = 0; r < w.rows; ++r) {
    const double xr = x[r];
    if (xr == 0.0) continue;
    const double* wr = w.Row(r);
    for (int c = 0; c < w.cols; ++c) y[c] += xr * wr[c];
  }
}

// W += a b^T
inline void AddOuter(Matrix* w, const double* a, const double* b) {
  for (int r = 0; r < w->rows; ++r) {
    const double ar = a[r];
    if (ar == 0.0) continue;
    double* wr = w->Row(r);
    for (int c = 0; c < w->cols; ++c) wr[c] += ar * b[c];
  }
}

inline void AxpyN(double alpha, const double* x, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] += alpha * x[i];
}

}  // namespace wavprom

#endif  // WAVPROM_BASE_MATRIX_H_
