// SPDX-License-Identifier: Apache-2.0
#include "glyphembed/classifier.hpp"

#include <numeric>

#include "glyphembed/embedders.hpp"
#include "glyphembed/error.hpp"

namespace glyphembed {

std::size_t ProbDist::argmax() const {
  GLYPHEMBED_EXPECT(!probs.empty(), "argmax of an empty distribution");
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[best]) best = i;
  }
  return best;
}

double ProbDist::sum() const { return std::accumulate(probs.begin(), probs.end(), 0.0); }

std::vector<std::optional<char32_t>> pad_or_truncate(std::u32string_view chars, std::size_t target_len) {
  GLYPHEMBED_EXPECT(target_len >= 1, "target length must be at least 1");
  std::vector<std::optional<char32_t>> out(target_len);
  const std::size_t keep = std::min(chars.size(), target_len);
  for (std::size_t i = 0; i < keep; ++i) out[i] = chars[i];
  return out;
}

GruParams add_gru_params(ParameterStore& store, std::size_t d_c, std::size_t d_h, std::uint64_t seed) {
  GLYPHEMBED_EXPECT(d_c >= 1 && d_h >= 1, "GRU widths must be positive");
  for (const char* gate : {"z", "r", "h"}) {
    Parameter& w = store.add(std::string("gru.W_") + gate, {d_h, d_c});
    init_uniform(w, seed, glorot_bound(d_c, d_h));
    Parameter& u = store.add(std::string("gru.U_") + gate, {d_h, d_h});
    init_uniform(u, seed, glorot_bound(d_h, d_h));
    store.add(std::string("gru.b_") + gate, {d_h});
  }
  return bind_gru_params(store);
}

GruParams bind_gru_params(ParameterStore& store) {
  GruParams p;
  p.w_z = &store.at("gru.W_z");
  p.w_r = &store.at("gru.W_r");
  p.w_h = &store.at("gru.W_h");
  p.u_z = &store.at("gru.U_z");
  p.u_r = &store.at("gru.U_r");
  p.u_h = &store.at("gru.U_h");
  p.b_z = &store.at("gru.b_z");
  p.b_r = &store.at("gru.b_r");
  p.b_h = &store.at("gru.b_h");
  return p;
}

HeadParams add_head_params(ParameterStore& store, std::size_t d_h, std::size_t classes, std::uint64_t seed) {
  if (classes < 2) throw ConfigError("a classifier needs at least 2 categories");
  Parameter& w = store.add("head.weight", {classes, d_h});
  init_uniform(w, seed, glorot_bound(d_h, classes));
  store.add("head.bias", {classes});
  return bind_head_params(store);
}

HeadParams bind_head_params(ParameterStore& store) {
  return HeadParams{&store.at("head.weight"), &store.at("head.bias")};
}

Var gru_step(Graph& g, const GruParams& p, Var h_prev, Var x) {
  GLYPHEMBED_EXPECT(g.shape(x) == Shape({p.input_width()}), "GRU input width mismatch");
  GLYPHEMBED_EXPECT(g.shape(h_prev) == Shape({p.hidden_width()}), "GRU state width mismatch");
  const Var z = g.sigmoid(g.add(g.affine(x, g.param(*p.w_z), g.param(*p.b_z)), g.matvec(g.param(*p.u_z), h_prev)));
  const Var r = g.sigmoid(g.add(g.affine(x, g.param(*p.w_r), g.param(*p.b_r)), g.matvec(g.param(*p.u_r), h_prev)));
  const Var candidate = g.tanh(
      g.add(g.affine(x, g.param(*p.w_h), g.param(*p.b_h)), g.matvec(g.param(*p.u_h), g.mul(r, h_prev))));
  return g.lerp(h_prev, candidate, z);
}

Var encode_sequence(Graph& g, const GruParams& p, std::span<const Var> embeds) {
  GLYPHEMBED_EXPECT(!embeds.empty(), "cannot encode an empty sequence");
  Var h = g.constant(Tensor({p.hidden_width()}));
  for (Var x : embeds) h = gru_step(g, p, h, x);
  return h;
}

Var head_logits(Graph& g, const HeadParams& head, Var encoding) {
  return g.affine(encoding, g.param(*head.weight), g.param(*head.bias));
}

Var classify(Graph& g, const HeadParams& head, Var encoding) { return g.softmax(head_logits(g, head, encoding)); }

}  // namespace glyphembed
