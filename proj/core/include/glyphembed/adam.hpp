// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "glyphembed/tensor.hpp"

namespace glyphembed {

struct AdamState {
  double eta = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
};

/// One bias-corrected Adam update over every parameter in the store. Gradients are read,
/// not cleared. Moment buffers are created on the first call.
void adam_step(AdamState& state, ParameterStore& params);

}  // namespace glyphembed
