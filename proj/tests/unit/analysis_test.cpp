// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <memory>
#include <sstream>

#include "glyphembed/analysis.hpp"
#include "glyphembed/error.hpp"
#include "glyphembed/model.hpp"
#include "glyphembed/procedural.hpp"
#include "glyphembed/rng.hpp"
#include "glyphembed/synthetic.hpp"
#include "support/oracles.hpp"

namespace {

namespace ge = glyphembed;

ge::EvalRecord record(bool correct, double freq) {
  return ge::make_record(U"x", 0, ge::ProbDist{correct ? std::vector<double>{0.9, 0.1} : std::vector<double>{0.1, 0.9}},
                         freq);
}

TEST(Accuracy, Basics) {
  const std::vector<ge::EvalRecord> r = {record(true, 1), record(true, 2), record(false, 3), record(true, 4)};
  EXPECT_EQ(ge::accuracy(r), 0.75);
  const std::vector<ge::EvalRecord> all = {record(true, 1), record(true, 1)};
  EXPECT_EQ(ge::accuracy(all), 1.0);
  EXPECT_THROW(ge::accuracy({}), ge::ContractViolation);
}

TEST(KRarest, Cases) {
  const std::vector<ge::EvalRecord> r = {record(false, 5), record(true, 0), record(true, 3), record(false, 0),
                                         record(true, 9)};
  EXPECT_EQ(ge::k_rarest_accuracy(r, r.size()), ge::accuracy(r));
  EXPECT_EQ(ge::k_rarest_accuracy(r, 2), 0.5);  // the two zero-frequency records
  EXPECT_EQ(ge::k_rarest_accuracy(r, 3), 2.0 / 3);
  EXPECT_THROW(ge::k_rarest_accuracy(r, 0), ge::ContractViolation);
  EXPECT_THROW(ge::k_rarest_accuracy(r, 6), ge::ContractViolation);
}

TEST(RarityCurve, AllWrongAllRight) {
  std::vector<ge::EvalRecord> wrong, right;
  for (int i = 0; i < 7; ++i) {
    wrong.push_back(record(false, i));
    right.push_back(record(true, 7 - i));
  }
  const auto zero = ge::cumulative_rarity_curve(wrong);
  for (const auto& p : zero) EXPECT_EQ(p.cumulative_correct, 0u);
  const auto diag = ge::cumulative_rarity_curve(right);
  for (const auto& p : diag) EXPECT_EQ(p.cumulative_correct, p.rank);
  EXPECT_EQ(diag.front().rank, 1u);
}

TEST(RarityCurve, MatchesPrefixSums) {
  ge::CounterRng rng(21);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ge::EvalRecord> r;
    const std::size_t n = 1 + rng.below(40);
    for (std::size_t i = 0; i < n; ++i) r.push_back(record(rng.uniform() < 0.5, static_cast<double>(rng.below(6))));
    // Selection by (frequency, input position), then running sums.
    std::vector<bool> used(n, false);
    std::vector<std::size_t> sums;
    std::size_t running = 0;
    for (std::size_t step = 0; step < n; ++step) {
      std::size_t pick = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (!used[i] && (pick == n || r[i].avg_frequency < r[pick].avg_frequency)) pick = i;
      }
      used[pick] = true;
      running += r[pick].correct() ? 1 : 0;
      sums.push_back(running);
    }
    const auto curve = ge::cumulative_rarity_curve(r);
    ASSERT_EQ(curve.size(), n);
    for (std::size_t i = 0; i < n; ++i) {
      ASSERT_EQ(curve[i].rank, i + 1);
      ASSERT_EQ(curve[i].cumulative_correct, sums[i]);
    }
    const std::size_t k = 1 + rng.below(n);
    ASSERT_EQ(ge::k_rarest_accuracy(r, k), static_cast<double>(sums[k - 1]) / static_cast<double>(k));
  }
}

TEST(Writers, CurveAndRecords) {
  const std::vector<ge::EvalRecord> r = {record(true, 2), record(false, 1)};
  std::ostringstream curve;
  ge::write_curve_tsv(curve, ge::cumulative_rarity_curve(r));
  EXPECT_EQ(curve.str(), "rank\tcumulative_correct\n1\t0\n2\t1\n");
  std::ostringstream lines;
  ge::write_eval_records(lines, r, {"yes", "no"});
  EXPECT_NE(lines.str().find("\"predicted\":\"no\""), std::string::npos) << lines.str();
}

TEST(Heatmap, CornersFromRemovedHalves) {
  std::array<double, 4> d{};
  d[static_cast<int>(ge::Half::upper)] = 1.0;
  d[static_cast<int>(ge::Half::lower)] = 4.0;
  d[static_cast<int>(ge::Half::left)] = 2.0;
  d[static_cast<int>(ge::Half::right)] = 8.0;
  const auto h = ge::heatmap_from_distances(d);
  EXPECT_EQ(h.raw_corners[ge::top_left], 12.0);      // keep-lower + keep-right
  EXPECT_EQ(h.raw_corners[ge::top_right], 6.0);      // keep-lower + keep-left
  EXPECT_EQ(h.raw_corners[ge::bottom_left], 9.0);    // keep-upper + keep-right
  EXPECT_EQ(h.raw_corners[ge::bottom_right], 3.0);   // keep-upper + keep-left
  EXPECT_EQ(h.corners[ge::top_left], 1.0);
  EXPECT_EQ(h.corners[ge::bottom_right], 0.25);
  EXPECT_EQ(h.max_corner(), ge::top_left);
  EXPECT_DOUBLE_EQ(h.overlay(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(h.overlay(0, 35), 0.5);
  EXPECT_DOUBLE_EQ(h.overlay(35, 0), 0.75);
  EXPECT_DOUBLE_EQ(h.overlay(35, 35), 0.25);
  EXPECT_TRUE(ge::heatmap_from_distances({}).overlay.blank());
}

struct Visual {
  ge::synthetic::LabeledCorpus corpus = ge::synthetic::overfit_fixture();
  std::shared_ptr<const ge::GlyphProvider> glyphs = std::make_shared<const ge::GlyphProvider>(ge::ProceduralSource{});
  ge::Model model = make(ge::ModelKind::visual);

  ge::Model make(ge::ModelKind kind) {
    ge::ModelConfig cfg;
    cfg.kind = kind;
    ge::Model m(cfg, ge::char_frequency_table(corpus.instances), corpus.categories, glyphs, 2);
    // Nonzero biases so the checks below do not rest on zero-input shortcuts.
    for (std::size_t i = 0; i < m.params().size(); ++i) {
      auto& p = m.params()[i];
      if (p.name().find("bias") != std::string::npos) p.value().fill(0.01);
    }
    return m;
  }
};

TEST(Occlusion, BlankGlyphGivesZeroHeatmap) {
  Visual v;
  const auto h = ge::occlusion_heatmap(v.model, ge::GlyphImage{});
  for (double d : h.distances) EXPECT_EQ(d, 0.0);
  for (double c : h.corners) EXPECT_EQ(c, 0.0);
  EXPECT_TRUE(h.overlay.blank());
}

TEST(Occlusion, InkOnlyInUpperHalf) {
  Visual v;
  ge::GlyphImage img;
  ge::procedural::place(img, ge::procedural::semantic_radical(2), ge::procedural::Slot::top_left);
  ge::procedural::place(img, ge::procedural::component_radical(5), ge::procedural::Slot::top_right);
  const auto h = ge::occlusion_heatmap(v.model, img);
  EXPECT_EQ(h.distance(ge::Half::upper), 0.0);
  EXPECT_GT(h.distance(ge::Half::lower), 0.0);
}

TEST(Occlusion, LookupModelIsRejected) {
  Visual v;
  const auto lookup = v.make(ge::ModelKind::lookup);
  EXPECT_THROW(ge::occlusion_heatmap(lookup, ge::GlyphImage{}), ge::ConfigError);
}

TEST(Knn, IdenticalImagesAreNearest) {
  Visual v;
  const std::vector<char32_t> chars = {0xE021, U' ', 0xE042, 0x3000, 0xE063};
  const auto n = ge::knn_chars(v.model, chars, U' ', 4);
  ASSERT_EQ(n.size(), 4u);
  EXPECT_EQ(n[0].codepoint, 0x3000u);
  EXPECT_EQ(n[0].distance, 0.0);
  // k = |chars| - 1 ranks everything but the query.
  for (std::size_t i = 1; i < n.size(); ++i) EXPECT_LE(n[i - 1].distance, n[i].distance);
  EXPECT_THROW(ge::knn_chars(v.model, chars, U' ', 5), ge::ContractViolation);
}

TEST(Knn, MatchesExhaustiveRanking) {
  ge::CounterRng rng(33);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.below(20), dim = 1 + rng.below(6);
    std::vector<std::pair<char32_t, std::vector<double>>> table;
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> e(dim);
      // Coarse values so exact distance ties occur.
      for (auto& x : e) x = static_cast<double>(rng.below(4));
      table.emplace_back(static_cast<char32_t>(0x4E00 + i), e);
    }
    const auto& [query, qv] = table[rng.below(n)];
    const std::size_t k = 1 + rng.below(n - 1);
    const auto got = ge::knn_rank(table, qv, query, k);
    const auto want = oracle::knn(table, qv, query, k);
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < k; ++i) {
      ASSERT_EQ(got[i].codepoint, want[i].first);
      ASSERT_EQ(got[i].distance, want[i].second);
    }
  }
}

}  // namespace
