// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "glyphembed/adam.hpp"
#include "glyphembed/classifier.hpp"
#include "glyphembed/corpus.hpp"
#include "glyphembed/embedders.hpp"
#include "glyphembed/fusion.hpp"
#include "glyphembed/glyph.hpp"
#include "glyphembed/graph.hpp"

namespace glyphembed {

enum class ModelKind { lookup, visual, early };

std::string_view to_string(ModelKind kind);
/// Throws ConfigError for anything but lookup, visual, early.
ModelKind parse_model_kind(std::string_view name);

struct ModelConfig {
  ModelKind kind = ModelKind::lookup;
  std::size_t d_c = 128;
  std::size_t d_h = 128;
  std::size_t seq_len = 10;
};

/// Character embedder (lookup table, glyph CNN, or both fused) + GRU encoder + softmax head.
class Model {
 public:
  /// Memoizes per-token embeddings inside one graph so a character shared by several
  /// positions or titles is embedded once and its gradient contributions accumulate.
  class EmbedCache {
   public:
    explicit EmbedCache(Graph& graph) : graph_(&graph) {}

   private:
    friend class Model;
    Graph* graph_;
    std::unordered_map<std::uint64_t, Var> vars_;
  };

  /// Vocabulary and frequencies come from the training split. `glyphs` is required for
  /// visual and early models and ignored by lookup models.
  Model(ModelConfig config, FrequencyTable train_frequencies, std::vector<std::string> categories,
        std::shared_ptr<const GlyphProvider> glyphs, std::uint64_t seed);

  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;
  Model(Model&&) noexcept = default;
  Model& operator=(Model&&) noexcept = default;

  const ModelConfig& config() const { return config_; }
  ModelKind kind() const { return config_.kind; }
  const CharVocab& vocab() const { return vocab_; }
  const FrequencyTable& frequencies() const { return frequencies_; }
  const std::vector<std::string>& categories() const { return categories_; }
  std::size_t num_classes() const { return categories_.size(); }
  const std::shared_ptr<const GlyphProvider>& glyphs() const { return glyphs_; }

  ParameterStore& params() { return params_; }
  const ParameterStore& params() const { return params_; }

  bool has_lookup() const { return config_.kind != ModelKind::visual; }
  bool has_visual() const { return config_.kind != ModelKind::lookup; }
  const LookupParams& lookup_params() const;
  const VisualCnnParams& visual_params() const;
  const GruParams& gru_params() const { return gru_; }
  const HeadParams& head_params() const { return head_; }
  const EarlyFusionParams& fusion_params() const;

  /// Embedding of one padded position (nullopt = PAD).
  Var embed(EmbedCache& cache, std::optional<char32_t> token) const;
  /// Unnormalized category scores for a title (padded/truncated to seq_len).
  Var logits(EmbedCache& cache, std::u32string_view title) const;

  ProbDist predict(std::u32string_view title) const;
  std::vector<ProbDist> predict_all(std::span<const std::u32string> titles) const;

  /// Per-character embedding as fed to the encoder.
  std::vector<double> char_embedding(char32_t codepoint) const;
  /// CNN embedding of an arbitrary glyph image; requires a visual encoder.
  std::vector<double> glyph_embedding(const GlyphImage& image) const;

  /// Copies every parameter whose name and shape match in `source`; returns how many.
  std::size_t copy_matching_params(const Model& source);

 private:
  void bind();

  ModelConfig config_;
  FrequencyTable frequencies_;
  CharVocab vocab_;
  std::vector<std::string> categories_;
  std::shared_ptr<const GlyphProvider> glyphs_;
  ParameterStore params_;
  LookupParams lookup_;
  VisualCnnParams visual_;
  EarlyFusionParams fusion_;
  GruParams gru_;
  HeadParams head_;
};

struct TrainConfig {
  std::size_t batch_size = 400;
  std::size_t seq_len = 10;
  std::size_t d_c = 128;
  std::size_t d_h = 128;
  double eta = 0.001;
  std::size_t epochs = 10;
  std::uint64_t seed = 1;
  ModelKind kind = ModelKind::lookup;
  /// Instances per graph inside a minibatch; bounds memory, not the math.
  std::size_t chunk_size = 16;
};

ModelConfig model_config(const TrainConfig& config);

struct EpochReport {
  std::size_t epoch = 0;
  /// Mean per-instance cross-entropy over the epoch, computed before each update.
  double mean_loss = 0.0;
  /// Fraction of training instances classified correctly during the forward passes.
  double train_accuracy = 0.0;
  std::optional<double> valid_accuracy;
  std::vector<double> batch_losses;
};

/// One pass over `train` in a seed- and epoch-determined order: minibatches of
/// cfg.batch_size (the last may be smaller and is averaged by its own size),
/// forward, loss, backward, Adam step. Throws ConfigError on an empty corpus.
EpochReport train_epoch(Model& model, AdamState& optimizer, std::span<const Instance> train, const TrainConfig& cfg,
                        std::size_t epoch);

double evaluate_accuracy(const Model& model, std::span<const Instance> instances);

struct TrainResult {
  std::vector<EpochReport> epochs;
  /// 0 when no epoch ran; otherwise the 1-based epoch whose parameters were kept.
  std::size_t best_epoch = 0;
  std::optional<double> best_valid_accuracy;
};

/// Runs cfg.epochs epochs and leaves the model at the epoch with the best validation
/// accuracy (the last epoch when `valid` is empty).
TrainResult train_model(Model& model, std::span<const Instance> train, std::span<const Instance> valid,
                        const TrainConfig& cfg, const std::function<void(const EpochReport&)>& on_epoch = {});

}  // namespace glyphembed
