// SPDX-License-Identifier: Apache-2.0
#include "glyphembed/adam.hpp"

#include <cmath>

#include "glyphembed/error.hpp"

namespace glyphembed {

void adam_step(AdamState& state, ParameterStore& params) {
  if (state.m.empty() && state.v.empty()) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      state.m.emplace_back(params[i].shape());
      state.v.emplace_back(params[i].shape());
    }
  }
  GLYPHEMBED_EXPECT(state.m.size() == params.size() && state.v.size() == params.size(),
                    "Adam moments do not match the parameter set");

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(state.beta1, t);
  const double correction2 = 1.0 - std::pow(state.beta2, t);

  for (std::size_t i = 0; i < params.size(); ++i) {
    Parameter& p = params[i];
    GLYPHEMBED_EXPECT(state.m[i].shape() == p.shape(), "Adam moment shape mismatch for " + p.name());
    auto value = p.value().values();
    const auto grad = p.grad().values();
    auto m = state.m[i].values();
    auto v = state.v[i].values();
    for (std::size_t k = 0; k < value.size(); ++k) {
      m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * grad[k];
      v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * grad[k] * grad[k];
      const double m_hat = m[k] / correction1;
      const double v_hat = v[k] / correction2;
      value[k] -= state.eta * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  }
}

}  // namespace glyphembed
