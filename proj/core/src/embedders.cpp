// SPDX-License-Identifier: Apache-2.0
#include "glyphembed/embedders.hpp"

#include <algorithm>
#include <cmath>

#include "glyphembed/error.hpp"

namespace glyphembed {
namespace {

std::uint64_t name_hash(const std::string& name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : name) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace

CharVocab::CharVocab(std::vector<char32_t> chars) : chars_(std::move(chars)) {
  std::sort(chars_.begin(), chars_.end());
  chars_.erase(std::unique(chars_.begin(), chars_.end()), chars_.end());
  for (std::size_t i = 0; i < chars_.size(); ++i) index_.emplace(chars_[i], i + 2);
}

std::size_t CharVocab::id(char32_t codepoint) const {
  auto it = index_.find(codepoint);
  return it == index_.end() ? kUnk : it->second;
}

char32_t CharVocab::codepoint(std::size_t id) const {
  GLYPHEMBED_EXPECT(id >= 2 && id < size(), "vocabulary id has no codepoint");
  return chars_[id - 2];
}

double glorot_bound(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

void init_uniform(Parameter& p, std::uint64_t seed, double bound) {
  CounterRng rng = CounterRng(seed).split(name_hash(p.name()));
  for (double& v : p.value().values()) v = rng.uniform(-bound, bound);
}

LookupParams add_lookup_params(ParameterStore& store, std::size_t vocab_size, std::size_t d_c, std::uint64_t seed) {
  GLYPHEMBED_EXPECT(vocab_size >= 2 && d_c >= 1, "lookup table needs PAD/UNK rows and a positive width");
  Parameter& table = store.add("lookup.table", {vocab_size, d_c});
  init_uniform(table, seed, 1.0 / std::sqrt(static_cast<double>(d_c)));
  return LookupParams{&table};
}

LookupParams bind_lookup_params(ParameterStore& store) { return LookupParams{&store.at("lookup.table")}; }

VisualCnnParams add_visual_params(ParameterStore& store, std::size_t d_c, std::uint64_t seed) {
  if (d_c != kVisualEmbeddingWidth) {
    throw ConfigError("the visual encoder requires d_c = 128 (got " + std::to_string(d_c) + ")");
  }
  auto conv = [&](const std::string& name, std::size_t in_channels) {
    Parameter& w = store.add(name + ".weight", {kConvChannels, in_channels, 3, 3});
    init_uniform(w, seed, glorot_bound(in_channels * 9, kConvChannels * 9));
    store.add(name + ".bias", {kConvChannels});
  };
  auto linear = [&](const std::string& name, std::size_t in, std::size_t out) {
    Parameter& w = store.add(name + ".weight", {out, in});
    init_uniform(w, seed, glorot_bound(in, out));
    store.add(name + ".bias", {out});
  };
  conv("cnn.conv1", 1);
  conv("cnn.conv2", kConvChannels);
  conv("cnn.conv3", kConvChannels);
  linear("cnn.fc1", kVisualFlatWidth, d_c);
  linear("cnn.fc2", d_c, d_c);
  return bind_visual_params(store);
}

VisualCnnParams bind_visual_params(ParameterStore& store) {
  VisualCnnParams p;
  p.conv1_weight = &store.at("cnn.conv1.weight");
  p.conv1_bias = &store.at("cnn.conv1.bias");
  p.conv2_weight = &store.at("cnn.conv2.weight");
  p.conv2_bias = &store.at("cnn.conv2.bias");
  p.conv3_weight = &store.at("cnn.conv3.weight");
  p.conv3_bias = &store.at("cnn.conv3.bias");
  p.fc1_weight = &store.at("cnn.fc1.weight");
  p.fc1_bias = &store.at("cnn.fc1.bias");
  p.fc2_weight = &store.at("cnn.fc2.weight");
  p.fc2_bias = &store.at("cnn.fc2.bias");
  return p;
}

EmbedderParams init_params(ParameterStore& store, std::uint64_t seed, std::size_t vocab_size, std::size_t d_c) {
  EmbedderParams out;
  out.visual = add_visual_params(store, d_c, seed);
  out.lookup = add_lookup_params(store, vocab_size, d_c, seed);
  return out;
}

Var lookup_embed(Graph& graph, const LookupParams& params, std::size_t char_id) {
  GLYPHEMBED_EXPECT(params.table != nullptr, "lookup table not bound");
  GLYPHEMBED_EXPECT(char_id < params.table->shape()[0], "character id out of vocabulary range");
  return graph.gather_row(*params.table, char_id);
}

Tensor glyph_tensor(const GlyphImage& image) {
  const auto px = image.pixels();
  return Tensor({1, kGlyphSize, kGlyphSize}, std::vector<double>(px.begin(), px.end()));
}

Var visual_embed(Graph& graph, const VisualCnnParams& params, const GlyphImage& image, std::vector<Shape>* trace) {
  return visual_embed(graph, params, graph.constant(glyph_tensor(image)), trace);
}

Var visual_embed(Graph& graph, const VisualCnnParams& p, Var image, std::vector<Shape>* trace) {
  GLYPHEMBED_EXPECT(graph.shape(image) == Shape({1, kGlyphSize, kGlyphSize}),
                    "visual_embed expects a 1x36x36 glyph, got " + shape_string(graph.shape(image)));
  auto record = [&](Var v) {
    if (trace) trace->push_back(graph.shape(v));
    return v;
  };
  Var x = image;
  x = record(graph.relu(graph.conv2d(x, graph.param(*p.conv1_weight), graph.param(*p.conv1_bias))));
  x = record(graph.maxpool2d(x));
  x = record(graph.relu(graph.conv2d(x, graph.param(*p.conv2_weight), graph.param(*p.conv2_bias))));
  x = record(graph.maxpool2d(x));
  x = record(graph.relu(graph.conv2d(x, graph.param(*p.conv3_weight), graph.param(*p.conv3_bias))));
  x = record(graph.reshape(x, {element_count(graph.shape(x))}));
  x = record(graph.relu(graph.affine(x, graph.param(*p.fc1_weight), graph.param(*p.fc1_bias))));
  x = record(graph.relu(graph.affine(x, graph.param(*p.fc2_weight), graph.param(*p.fc2_bias))));
  return x;
}

}  // namespace glyphembed
