// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "glyphembed/classifier.hpp"
#include "glyphembed/fusion.hpp"
#include "glyphembed/glyph.hpp"

namespace glyphembed {

class Model;

struct EvalRecord {
  std::u32string title;
  std::size_t gold = 0;
  std::size_t predicted = 0;
  ProbDist probs;
  double avg_frequency = 0.0;
  std::optional<Route> route;

  bool correct() const { return gold == predicted; }
};

/// predicted = probs.argmax().
EvalRecord make_record(std::u32string title, std::size_t gold, ProbDist probs, double avg_frequency,
                       std::optional<Route> route = std::nullopt);

double accuracy(std::span<const EvalRecord> records);

/// Record indices sorted ascending by average character frequency; equal frequencies keep input order.
std::vector<std::size_t> rarity_order(std::span<const EvalRecord> records);

double k_rarest_accuracy(std::span<const EvalRecord> records, std::size_t k);

struct CurvePoint {
  std::size_t rank = 0;  // 1-based, rarest first
  std::size_t cumulative_correct = 0;
};

std::vector<CurvePoint> cumulative_rarity_curve(std::span<const EvalRecord> records);

enum Corner : std::size_t { top_left = 0, top_right = 1, bottom_left = 2, bottom_right = 3 };

struct OcclusionHeatmap {
  /// Indexed by Half: embedding distance after keeping only that half.
  std::array<double, 4> distances{};
  std::array<double, 4> raw_corners{};
  /// raw_corners / max(raw_corners), or all zero.
  std::array<double, 4> corners{};
  /// Corner grid bilinearly upsampled to 36x36; pixel (0,0) carries the top-left score.
  GlyphImage overlay;

  double distance(Half keep) const { return distances[static_cast<std::size_t>(keep)]; }
  std::size_t max_corner() const;
};

/// A corner accumulates the two distances whose removed half covers it.
OcclusionHeatmap heatmap_from_distances(const std::array<double, 4>& distances);
OcclusionHeatmap occlusion_heatmap(const Model& model, const GlyphImage& image);

/// Glyph ink scaled by the overlay, for viewing.
GlyphImage overlay_render(const OcclusionHeatmap& heatmap, const GlyphImage& glyph);

struct Neighbor {
  char32_t codepoint = 0;
  double distance = 0.0;
};

double l2_distance(std::span<const double> a, std::span<const double> b);

/// Nearest `k` entries to `query` by L2 distance, query excluded, ties by codepoint.
/// Throws ContractViolation when fewer than k candidates exist.
std::vector<Neighbor> knn_rank(std::span<const std::pair<char32_t, std::vector<double>>> embeddings,
                               std::span<const double> query_embedding, char32_t query, std::size_t k);

std::vector<Neighbor> knn_chars(const Model& model, std::span<const char32_t> chars, char32_t query,
                                std::size_t k = 6);

// Report writers.
void write_eval_records(std::ostream& out, std::span<const EvalRecord> records,
                        const std::vector<std::string>& categories);
void write_curve_tsv(std::ostream& out, std::span<const CurvePoint> curve);
void write_heatmap_sidecar(std::ostream& out, char32_t codepoint, const OcclusionHeatmap& heatmap);

}  // namespace glyphembed
