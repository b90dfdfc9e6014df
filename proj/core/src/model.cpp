// SPDX-License-Identifier: Apache-2.0
#include "glyphembed/model.hpp"

#include <algorithm>
#include <numeric>

#include "glyphembed/error.hpp"
#include "glyphembed/rng.hpp"

namespace glyphembed {
namespace {

constexpr std::uint64_t kPadKey = 1ULL << 40;

std::size_t argmax_of(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::lookup: return "lookup";
    case ModelKind::visual: return "visual";
    case ModelKind::early: return "early";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "lookup") return ModelKind::lookup;
  if (name == "visual") return ModelKind::visual;
  if (name == "early") return ModelKind::early;
  throw ConfigError("unknown model kind '" + std::string(name) + "' (expected lookup, visual or early)");
}

Model::Model(ModelConfig config, FrequencyTable train_frequencies, std::vector<std::string> categories,
             std::shared_ptr<const GlyphProvider> glyphs, std::uint64_t seed)
    : config_(config),
      frequencies_(std::move(train_frequencies)),
      vocab_(frequencies_.chars()),
      categories_(std::move(categories)),
      glyphs_(std::move(glyphs)) {
  if (config_.d_c == 0 || config_.d_h == 0 || config_.seq_len == 0) {
    throw ConfigError("d_c, d_h and sequence length must be positive");
  }
  if (categories_.size() < 2) throw ConfigError("a classifier needs at least 2 categories");
  if (has_visual() && !glyphs_) throw ConfigError("visual and early models need a glyph provider");

  if (has_visual()) add_visual_params(params_, config_.d_c, seed);
  if (has_lookup()) add_lookup_params(params_, vocab_.size(), config_.d_c, seed);
  if (config_.kind == ModelKind::early) add_early_fusion_params(params_, config_.d_c, seed);
  add_gru_params(params_, config_.d_c, config_.d_h, seed);
  add_head_params(params_, config_.d_h, categories_.size(), seed);
  bind();
}

void Model::bind() {
  if (has_visual()) visual_ = bind_visual_params(params_);
  if (has_lookup()) lookup_ = bind_lookup_params(params_);
  if (config_.kind == ModelKind::early) fusion_ = bind_early_fusion_params(params_);
  gru_ = bind_gru_params(params_);
  head_ = bind_head_params(params_);
}

const LookupParams& Model::lookup_params() const {
  GLYPHEMBED_EXPECT(has_lookup(), "model has no lookup table");
  return lookup_;
}

const VisualCnnParams& Model::visual_params() const {
  GLYPHEMBED_EXPECT(has_visual(), "model has no visual encoder");
  return visual_;
}

const EarlyFusionParams& Model::fusion_params() const {
  GLYPHEMBED_EXPECT(config_.kind == ModelKind::early, "model has no early-fusion layer");
  return fusion_;
}

Var Model::embed(EmbedCache& cache, std::optional<char32_t> token) const {
  const std::uint64_t key = token ? static_cast<std::uint64_t>(*token) : kPadKey;
  if (auto it = cache.vars_.find(key); it != cache.vars_.end()) return it->second;

  Graph& g = *cache.graph_;
  Var lookup_vec, visual_vec;
  if (has_lookup()) {
    const std::size_t id = token ? vocab_.id(*token) : CharVocab::kPad;
    lookup_vec = lookup_embed(g, lookup_, id);
  }
  if (has_visual()) {
    // PAD renders as a blank glyph; unseen characters are rendered, never mapped to UNK.
    const GlyphImage image = token ? glyphs_->render(*token) : GlyphImage{};
    visual_vec = visual_embed(g, visual_, image);
  }
  Var out;
  switch (config_.kind) {
    case ModelKind::lookup: out = lookup_vec; break;
    case ModelKind::visual: out = visual_vec; break;
    case ModelKind::early: out = early_fuse_embed(g, lookup_vec, visual_vec, fusion_); break;
  }
  cache.vars_.emplace(key, out);
  return out;
}

Var Model::logits(EmbedCache& cache, std::u32string_view title) const {
  Graph& g = *cache.graph_;
  const auto tokens = pad_or_truncate(title, config_.seq_len);
  std::vector<Var> embeds;
  embeds.reserve(tokens.size());
  for (const auto& token : tokens) embeds.push_back(embed(cache, token));
  return head_logits(g, head_, encode_sequence(g, gru_, embeds));
}

ProbDist Model::predict(std::u32string_view title) const {
  Graph g;
  EmbedCache cache(g);
  const Var probs = g.softmax(logits(cache, title));
  const auto v = g.value(probs);
  return ProbDist{std::vector<double>(v.begin(), v.end())};
}

std::vector<ProbDist> Model::predict_all(std::span<const std::u32string> titles) const {
  std::vector<ProbDist> out;
  out.reserve(titles.size());
  for (const auto& t : titles) out.push_back(predict(t));
  return out;
}

std::vector<double> Model::char_embedding(char32_t codepoint) const {
  Graph g;
  EmbedCache cache(g);
  const auto v = g.value(embed(cache, codepoint));
  return {v.begin(), v.end()};
}

std::vector<double> Model::glyph_embedding(const GlyphImage& image) const {
  GLYPHEMBED_EXPECT(has_visual(), "model has no visual encoder");
  Graph g;
  const auto v = g.value(visual_embed(g, visual_, image));
  return {v.begin(), v.end()};
}

std::size_t Model::copy_matching_params(const Model& source) {
  std::size_t copied = 0;
  for (std::size_t i = 0; i < params_.size(); ++i) {
    Parameter& dst = params_[i];
    const Parameter* src = source.params().find(dst.name());
    if (src == nullptr || src->shape() != dst.shape()) continue;
    if (dst.name() == "lookup.table" && !(source.vocab() == vocab_)) continue;
    dst.value() = src->value();
    ++copied;
  }
  return copied;
}

ModelConfig model_config(const TrainConfig& config) {
  return ModelConfig{config.kind, config.d_c, config.d_h, config.seq_len};
}

EpochReport train_epoch(Model& model, AdamState& optimizer, std::span<const Instance> train, const TrainConfig& cfg,
                        std::size_t epoch) {
  if (train.empty()) throw ConfigError("training corpus is empty");
  if (cfg.batch_size == 0) throw ConfigError("batch size must be positive");
  optimizer.eta = cfg.eta;

  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  CounterRng(cfg.seed).split(0x65706f6368ULL).split(epoch).shuffle(order);

  const std::size_t chunk = cfg.chunk_size == 0 ? cfg.batch_size : cfg.chunk_size;
  EpochReport report;
  report.epoch = epoch;
  double loss_sum = 0.0;
  std::size_t correct = 0;

  for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
    const std::size_t end = std::min(start + cfg.batch_size, order.size());
    const std::size_t batch = end - start;
    model.params().zero_grad();
    double batch_loss = 0.0;
    for (std::size_t c0 = start; c0 < end; c0 += chunk) {
      const std::size_t c1 = std::min(c0 + chunk, end);
      Graph g;
      Model::EmbedCache cache(g);
      std::vector<Var> scores;
      std::vector<std::size_t> labels;
      for (std::size_t k = c0; k < c1; ++k) {
        const Instance& inst = train[order[k]];
        GLYPHEMBED_EXPECT(inst.label < model.num_classes(), "instance label out of range");
        scores.push_back(model.logits(cache, inst.title));
        labels.push_back(inst.label);
        if (argmax_of(g.value(scores.back())) == inst.label) ++correct;
      }
      // Normalized by the whole minibatch so chunk gradients sum to the batch gradient.
      const Var loss = g.softmax_cross_entropy(scores, labels, batch);
      g.backward(loss);
      batch_loss += g.scalar(loss);
    }
    adam_step(optimizer, model.params());
    report.batch_losses.push_back(batch_loss);
    loss_sum += batch_loss * static_cast<double>(batch);
  }
  report.mean_loss = loss_sum / static_cast<double>(train.size());
  report.train_accuracy = static_cast<double>(correct) / static_cast<double>(train.size());
  return report;
}

double evaluate_accuracy(const Model& model, std::span<const Instance> instances) {
  GLYPHEMBED_EXPECT(!instances.empty(), "accuracy of an empty set");
  std::size_t correct = 0;
  for (const auto& inst : instances) {
    if (model.predict(inst.title).argmax() == inst.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(instances.size());
}

TrainResult train_model(Model& model, std::span<const Instance> train, std::span<const Instance> valid,
                        const TrainConfig& cfg, const std::function<void(const EpochReport&)>& on_epoch) {
  if (train.empty()) throw ConfigError("training corpus is empty");
  AdamState optimizer;
  optimizer.eta = cfg.eta;
  TrainResult result;
  ParameterStore best = model.params();
  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    EpochReport report = train_epoch(model, optimizer, train, cfg, epoch);
    if (!valid.empty()) report.valid_accuracy = evaluate_accuracy(model, valid);
    const bool improved = valid.empty() || !result.best_valid_accuracy ||
                          *report.valid_accuracy > *result.best_valid_accuracy;
    if (improved) {
      result.best_epoch = epoch;
      result.best_valid_accuracy = report.valid_accuracy;
      best.copy_values_from(model.params());
    }
    if (on_epoch) on_epoch(report);
    result.epochs.push_back(std::move(report));
  }
  model.params().copy_values_from(best);
  model.params().zero_grad();
  return result;
}

}  // namespace glyphembed
