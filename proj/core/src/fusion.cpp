// SPDX-License-Identifier: Apache-2.0
#include "glyphembed/fusion.hpp"

#include <cmath>

#include "glyphembed/embedders.hpp"
#include "glyphembed/error.hpp"
#include "glyphembed/model.hpp"

namespace glyphembed {

EarlyFusionParams add_early_fusion_params(ParameterStore& store, std::size_t d_c, std::uint64_t seed) {
  Parameter& w = store.add("fusion.proj.weight", {d_c, 2 * d_c});
  init_uniform(w, seed, glorot_bound(2 * d_c, d_c));
  store.add("fusion.proj.bias", {d_c});
  return bind_early_fusion_params(store);
}

EarlyFusionParams bind_early_fusion_params(ParameterStore& store) {
  return EarlyFusionParams{&store.at("fusion.proj.weight"), &store.at("fusion.proj.bias")};
}

Var early_fuse_embed(Graph& graph, Var lookup_vec, Var visual_vec, const EarlyFusionParams& params) {
  const std::size_t d_c = params.weight->shape()[0];
  GLYPHEMBED_EXPECT(graph.shape(lookup_vec) == Shape({d_c}) && graph.shape(visual_vec) == Shape({d_c}),
                    "early fusion inputs must both have width d_c");
  const Var joined = graph.concat(lookup_vec, visual_vec);
  return graph.relu(graph.affine(joined, graph.param(*params.weight), graph.param(*params.bias)));
}

ProbDist late_fuse_predict(const ProbDist& p_lookup, const ProbDist& p_visual) {
  GLYPHEMBED_EXPECT(p_lookup.size() == p_visual.size(), "late fusion needs distributions of equal length");
  GLYPHEMBED_EXPECT(std::abs(p_lookup.sum() - 1.0) <= 1e-6 && std::abs(p_visual.sum() - 1.0) <= 1e-6,
                    "late fusion inputs must each sum to 1");
  ProbDist out;
  out.probs.resize(p_lookup.size());
  for (std::size_t i = 0; i < out.probs.size(); ++i) out.probs[i] = 0.5 * (p_lookup[i] + p_visual[i]);
  return out;
}

double avg_char_frequency(std::u32string_view title, const FrequencyTable& table) {
  GLYPHEMBED_EXPECT(!title.empty(), "average frequency of an empty title");
  double total = 0.0;
  for (char32_t cp : title) total += static_cast<double>(table.count(cp));
  return total / static_cast<double>(title.size());
}

std::string_view to_string(Route route) { return route == Route::visual ? "visual" : "lookup"; }

FallbackResult fallback_predict(std::u32string_view title, const Model& lookup_model, const Model& visual_model,
                                const FallbackPolicy& policy, const FrequencyTable& table) {
  GLYPHEMBED_EXPECT(policy.threshold >= 0.0, "fallback threshold must be nonnegative");
  FallbackResult out;
  out.avg_frequency = avg_char_frequency(title, table);
  if (out.avg_frequency <= policy.threshold) {
    out.route = Route::visual;
    out.probs = visual_model.predict(title);
  } else {
    out.route = Route::lookup;
    out.probs = lookup_model.predict(title);
  }
  return out;
}

}  // namespace glyphembed
