// SPDX-License-Identifier: Apache-2.0
#include "glyphembed/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "glyphembed/error.hpp"
#include "glyphembed/model.hpp"
#include "glyphembed/utf8.hpp"
#include <nlohmann/json.hpp>

namespace glyphembed {

using nlohmann::json;

EvalRecord make_record(std::u32string title, std::size_t gold, ProbDist probs, double avg_frequency,
                       std::optional<Route> route) {
  EvalRecord r;
  r.title = std::move(title);
  r.gold = gold;
  r.predicted = probs.argmax();
  r.probs = std::move(probs);
  r.avg_frequency = avg_frequency;
  r.route = route;
  return r;
}

double accuracy(std::span<const EvalRecord> records) {
  GLYPHEMBED_EXPECT(!records.empty(), "accuracy of an empty record set");
  const auto hits = std::count_if(records.begin(), records.end(), [](const EvalRecord& r) { return r.correct(); });
  return static_cast<double>(hits) / static_cast<double>(records.size());
}

std::vector<std::size_t> rarity_order(std::span<const EvalRecord> records) {
  std::vector<std::size_t> order(records.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return records[a].avg_frequency < records[b].avg_frequency;
  });
  return order;
}

double k_rarest_accuracy(std::span<const EvalRecord> records, std::size_t k) {
  GLYPHEMBED_EXPECT(k >= 1 && k <= records.size(), "k must lie in [1, |records|]");
  const auto order = rarity_order(records);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < k; ++i) hits += records[order[i]].correct() ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(k);
}

std::vector<CurvePoint> cumulative_rarity_curve(std::span<const EvalRecord> records) {
  GLYPHEMBED_EXPECT(!records.empty(), "rarity curve of an empty record set");
  std::vector<CurvePoint> curve;
  curve.reserve(records.size());
  std::size_t running = 0;
  const auto order = rarity_order(records);
  for (std::size_t i = 0; i < order.size(); ++i) {
    running += records[order[i]].correct() ? 1 : 0;
    curve.push_back({i + 1, running});
  }
  return curve;
}

std::size_t OcclusionHeatmap::max_corner() const {
  return static_cast<std::size_t>(std::max_element(raw_corners.begin(), raw_corners.end()) - raw_corners.begin());
}

OcclusionHeatmap heatmap_from_distances(const std::array<double, 4>& distances) {
  constexpr auto U = static_cast<std::size_t>(Half::upper);
  constexpr auto D = static_cast<std::size_t>(Half::lower);
  constexpr auto L = static_cast<std::size_t>(Half::left);
  constexpr auto R = static_cast<std::size_t>(Half::right);

  OcclusionHeatmap h;
  h.distances = distances;
  // keep-lower and keep-right both remove the top-left corner, and so on.
  h.raw_corners[top_left] = distances[D] + distances[R];
  h.raw_corners[top_right] = distances[D] + distances[L];
  h.raw_corners[bottom_left] = distances[U] + distances[R];
  h.raw_corners[bottom_right] = distances[U] + distances[L];

  const double peak = *std::max_element(h.raw_corners.begin(), h.raw_corners.end());
  if (peak > 0.0) {
    for (std::size_t i = 0; i < 4; ++i) h.corners[i] = h.raw_corners[i] / peak;
  }
  const double last = static_cast<double>(kGlyphSize - 1);
  for (std::size_t r = 0; r < kGlyphSize; ++r) {
    const double v = static_cast<double>(r) / last;
    for (std::size_t c = 0; c < kGlyphSize; ++c) {
      const double u = static_cast<double>(c) / last;
      const double top = (1.0 - u) * h.corners[top_left] + u * h.corners[top_right];
      const double bottom = (1.0 - u) * h.corners[bottom_left] + u * h.corners[bottom_right];
      h.overlay(r, c) = std::clamp((1.0 - v) * top + v * bottom, 0.0, 1.0);
    }
  }
  return h;
}

OcclusionHeatmap occlusion_heatmap(const Model& model, const GlyphImage& image) {
  if (!model.has_visual()) throw ConfigError("occlusion analysis needs a visual model");
  const auto full = model.glyph_embedding(image);
  std::array<double, 4> distances{};
  for (Half keep : {Half::upper, Half::lower, Half::left, Half::right}) {
    distances[static_cast<std::size_t>(keep)] = l2_distance(full, model.glyph_embedding(mask_half(image, keep)));
  }
  return heatmap_from_distances(distances);
}

GlyphImage overlay_render(const OcclusionHeatmap& heatmap, const GlyphImage& glyph) {
  GlyphImage out;
  for (std::size_t i = 0; i < kGlyphPixels; ++i) out.pixels()[i] = heatmap.overlay.pixels()[i] * glyph.pixels()[i];
  return out;
}

double l2_distance(std::span<const double> a, std::span<const double> b) {
  GLYPHEMBED_EXPECT(a.size() == b.size(), "L2 distance between vectors of different width");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

std::vector<Neighbor> knn_rank(std::span<const std::pair<char32_t, std::vector<double>>> embeddings,
                               std::span<const double> query_embedding, char32_t query, std::size_t k) {
  std::vector<Neighbor> all;
  for (const auto& [cp, vec] : embeddings) {
    if (cp == query) continue;
    all.push_back({cp, l2_distance(query_embedding, vec)});
  }
  GLYPHEMBED_EXPECT(k <= all.size(), "k = " + std::to_string(k) + " exceeds the " + std::to_string(all.size()) +
                                         " candidate characters");
  std::sort(all.begin(), all.end(), [](const Neighbor& a, const Neighbor& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.codepoint < b.codepoint;
  });
  all.resize(k);
  return all;
}

std::vector<Neighbor> knn_chars(const Model& model, std::span<const char32_t> chars, char32_t query, std::size_t k) {
  std::vector<std::pair<char32_t, std::vector<double>>> table;
  table.reserve(chars.size());
  for (char32_t cp : chars) table.emplace_back(cp, model.char_embedding(cp));
  const auto q = model.char_embedding(query);
  return knn_rank(table, q, query, k);
}

void write_eval_records(std::ostream& out, std::span<const EvalRecord> records,
                        const std::vector<std::string>& categories) {
  for (const auto& r : records) {
    json j;
    j["title"] = utf8::encode(r.title);
    j["gold"] = categories.at(r.gold);
    j["predicted"] = categories.at(r.predicted);
    j["correct"] = r.correct();
    j["probs"] = r.probs.probs;
    j["avg_char_frequency"] = r.avg_frequency;
    if (r.route) j["route"] = std::string(to_string(*r.route));
    out << j.dump() << '\n';
  }
}

void write_curve_tsv(std::ostream& out, std::span<const CurvePoint> curve) {
  out << "rank\tcumulative_correct\n";
  for (const auto& p : curve) out << p.rank << '\t' << p.cumulative_correct << '\n';
}

void write_heatmap_sidecar(std::ostream& out, char32_t codepoint, const OcclusionHeatmap& heatmap) {
  json j;
  j["codepoint"] = static_cast<std::uint32_t>(codepoint);
  j["char"] = utf8::encode(codepoint);
  for (Half keep : {Half::upper, Half::lower, Half::left, Half::right}) {
    j["distances"]["keep_" + std::string(to_string(keep))] = heatmap.distance(keep);
  }
  const char* names[4] = {"top_left", "top_right", "bottom_left", "bottom_right"};
  for (std::size_t i = 0; i < 4; ++i) {
    j["raw_corners"][names[i]] = heatmap.raw_corners[i];
    j["corners"][names[i]] = heatmap.corners[i];
  }
  out << j.dump(2) << '\n';
}

}  // namespace glyphembed
