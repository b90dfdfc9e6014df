// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "glyphembed/graph.hpp"
#include "glyphembed/tensor.hpp"

namespace glyphembed {

/// Posterior over categories.
struct ProbDist {
  std::vector<double> probs;

  std::size_t size() const { return probs.size(); }
  double operator[](std::size_t i) const { return probs[i]; }
  /// Ties go to the lowest index.
  std::size_t argmax() const;
  double sum() const;

  friend bool operator==(const ProbDist&, const ProbDist&) = default;
};

/// Right-pads with PAD (nullopt) or keeps the first `target_len` characters.
std::vector<std::optional<char32_t>> pad_or_truncate(std::u32string_view chars, std::size_t target_len);

struct GruParams {
  Parameter* w_z = nullptr;
  Parameter* w_r = nullptr;
  Parameter* w_h = nullptr;
  Parameter* u_z = nullptr;
  Parameter* u_r = nullptr;
  Parameter* u_h = nullptr;
  Parameter* b_z = nullptr;
  Parameter* b_r = nullptr;
  Parameter* b_h = nullptr;

  std::size_t input_width() const { return w_z->shape()[1]; }
  std::size_t hidden_width() const { return w_z->shape()[0]; }
};

struct HeadParams {
  Parameter* weight = nullptr;  // L×d_h, row j is w_j
  Parameter* bias = nullptr;    // L

  std::size_t classes() const { return weight->shape()[0]; }
};

/// Registers "gru.*" with Glorot-uniform weights and zero biases.
GruParams add_gru_params(ParameterStore& store, std::size_t d_c, std::size_t d_h, std::uint64_t seed);
GruParams bind_gru_params(ParameterStore& store);

/// Registers "head.*"; throws ConfigError when classes < 2.
HeadParams add_head_params(ParameterStore& store, std::size_t d_h, std::size_t classes, std::uint64_t seed);
HeadParams bind_head_params(ParameterStore& store);

/// z = σ(W_z x + U_z h + b_z), r = σ(W_r x + U_r h + b_r),
/// h̃ = tanh(W_h x + U_h (r ⊙ h) + b_h), h' = (1 − z) ⊙ h + z ⊙ h̃.
Var gru_step(Graph& graph, const GruParams& params, Var h_prev, Var x);

/// Folds gru_step over the sequence from a zero state; returns the final state.
Var encode_sequence(Graph& graph, const GruParams& params, std::span<const Var> embeds);

Var head_logits(Graph& graph, const HeadParams& head, Var encoding);
/// softmax(w_j·e + b_j).
Var classify(Graph& graph, const HeadParams& head, Var encoding);

}  // namespace glyphembed
