// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string_view>

#include "glyphembed/classifier.hpp"
#include "glyphembed/corpus.hpp"
#include "glyphembed/graph.hpp"
#include "glyphembed/tensor.hpp"

namespace glyphembed {

class Model;

/// d_c×(2·d_c) projection reducing concatenated lookup/visual embeddings back to d_c.
struct EarlyFusionParams {
  Parameter* weight = nullptr;
  Parameter* bias = nullptr;
};

/// Registers "fusion.proj.*": Glorot-uniform weight, zero bias.
EarlyFusionParams add_early_fusion_params(ParameterStore& store, std::size_t d_c, std::uint64_t seed);
EarlyFusionParams bind_early_fusion_params(ParameterStore& store);

/// relu(W · [lookup; visual] + b).
Var early_fuse_embed(Graph& graph, Var lookup_vec, Var visual_vec, const EarlyFusionParams& params);

/// Elementwise mean of two distributions over the same categories.
ProbDist late_fuse_predict(const ProbDist& p_lookup, const ProbDist& p_visual);

/// Mean training-set count of the title's characters (unseen characters count 0).
double avg_char_frequency(std::u32string_view title, const FrequencyTable& table);

struct FallbackPolicy {
  double threshold = 0.0;
};

enum class Route { lookup, visual };
std::string_view to_string(Route route);

struct FallbackResult {
  ProbDist probs;
  Route route = Route::lookup;
  double avg_frequency = 0.0;
};

/// Visual prediction when the title's average character frequency (from `table`) is at or
/// below the threshold, lookup prediction otherwise.
FallbackResult fallback_predict(std::u32string_view title, const Model& lookup_model, const Model& visual_model,
                                const FallbackPolicy& policy, const FrequencyTable& table);

}  // namespace glyphembed
