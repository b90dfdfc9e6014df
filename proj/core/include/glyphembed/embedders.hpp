// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "glyphembed/glyph.hpp"
#include "glyphembed/graph.hpp"
#include "glyphembed/rng.hpp"
#include "glyphembed/tensor.hpp"

namespace glyphembed {

/// Width of the CNN head's output; the visual pipeline is fixed to it.
inline constexpr std::size_t kVisualEmbeddingWidth = 128;
/// Flattened width after the third convolution: 32 channels × 5 × 5.
inline constexpr std::size_t kVisualFlatWidth = 800;
inline constexpr std::size_t kConvChannels = 32;

/// Character vocabulary with reserved PAD (id 0) and UNK (id 1); ids 2.. map to codepoints
/// in ascending codepoint order.
class CharVocab {
 public:
  static constexpr std::size_t kPad = 0;
  static constexpr std::size_t kUnk = 1;

  CharVocab() = default;
  /// Duplicates are removed; order of the input does not matter.
  explicit CharVocab(std::vector<char32_t> chars);

  std::size_t size() const { return chars_.size() + 2; }
  /// UNK for codepoints outside the vocabulary.
  std::size_t id(char32_t codepoint) const;
  bool contains(char32_t codepoint) const { return index_.contains(codepoint); }
  char32_t codepoint(std::size_t id) const;
  const std::vector<char32_t>& chars() const { return chars_; }

  friend bool operator==(const CharVocab& a, const CharVocab& b) { return a.chars_ == b.chars_; }

 private:
  std::vector<char32_t> chars_;
  std::unordered_map<char32_t, std::size_t> index_;
};

/// Handle to the |C|×d_c lookup table inside a ParameterStore.
struct LookupParams {
  Parameter* table = nullptr;
  std::size_t width() const { return table->shape()[1]; }
};

/// Handles to the three-convolution, two-linear glyph encoder.
struct VisualCnnParams {
  Parameter* conv1_weight = nullptr;
  Parameter* conv1_bias = nullptr;
  Parameter* conv2_weight = nullptr;
  Parameter* conv2_bias = nullptr;
  Parameter* conv3_weight = nullptr;
  Parameter* conv3_bias = nullptr;
  Parameter* fc1_weight = nullptr;
  Parameter* fc1_bias = nullptr;
  Parameter* fc2_weight = nullptr;
  Parameter* fc2_bias = nullptr;
};

/// Registers "lookup.table". Rows uniform in ±1/√d_c.
LookupParams add_lookup_params(ParameterStore& store, std::size_t vocab_size, std::size_t d_c, std::uint64_t seed);
LookupParams bind_lookup_params(ParameterStore& store);

/// Registers the "cnn.*" parameters. Weights are Glorot-uniform, biases zero.
/// Throws ConfigError unless d_c == 128.
VisualCnnParams add_visual_params(ParameterStore& store, std::size_t d_c, std::uint64_t seed);
VisualCnnParams bind_visual_params(ParameterStore& store);

/// Fills a parameter with U(−bound, bound) from a stream derived from (seed, parameter name).
void init_uniform(Parameter& p, std::uint64_t seed, double bound);
/// ±√(6 / (fan_in + fan_out)).
double glorot_bound(std::size_t fan_in, std::size_t fan_out);

struct EmbedderParams {
  LookupParams lookup;
  VisualCnnParams visual;
};

/// Both embedders in one store, deterministic per seed.
EmbedderParams init_params(ParameterStore& store, std::uint64_t seed, std::size_t vocab_size, std::size_t d_c);

Var lookup_embed(Graph& graph, const LookupParams& params, std::size_t char_id);

/// conv→relu→pool→conv→relu→pool→conv→relu→flatten→fc→relu→fc→relu.
/// When `trace` is given it receives the shape after each stage.
Var visual_embed(Graph& graph, const VisualCnnParams& params, const GlyphImage& image,
                 std::vector<Shape>* trace = nullptr);
/// Same pipeline on an image already in the graph; throws ContractViolation unless it is 1×36×36.
Var visual_embed(Graph& graph, const VisualCnnParams& params, Var image, std::vector<Shape>* trace = nullptr);

/// Graph input for a glyph: 1×36×36.
Tensor glyph_tensor(const GlyphImage& image);

}  // namespace glyphembed
