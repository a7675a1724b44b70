// wavprom/base/params.h

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

#ifndef WAVPROM_BASE_PARAMS_H_
#define WAVPROM_BASE_PARAMS_H_

#include <cstdint>
#include <functional>
#include <string>

namespace wavprom {

// One named parameter tensor exposed by a layer. `grad` is null for
// non-trainable buffers (batch-norm running statistics); those are still
// serialized into checkpoints but skipped by the optimizer.
struct ParamRef {
  std::string name;
  double* value = nullptr;
  double* grad = nullptr;
  int64_t size = 0;
  bool trainable = true;
};

using ParamVisitor = std::function<void(const ParamRef&)>;

struct PassContext {
  bool training = false;
  class Rng* dropout_rng = nullptr;
};

}  // namespace wavprom

#endif  // WAVPROM_BASE_PARAMS_H_
