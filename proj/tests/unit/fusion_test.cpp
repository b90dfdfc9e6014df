// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <limits>
#include <memory>

#include "glyphembed/error.hpp"
#include "glyphembed/fusion.hpp"
#include "glyphembed/model.hpp"
#include "glyphembed/rng.hpp"
#include "glyphembed/synthetic.hpp"
#include "support/oracles.hpp"

namespace {

namespace ge = glyphembed;
using oracle::Vec;

TEST(EarlyFuse, ZeroInputsZeroParams) {
  ge::ParameterStore s;
  const auto p = ge::add_early_fusion_params(s, 4, 1);
  p.weight->value().fill(0.0);
  ge::Graph g;
  const auto zero = g.constant(ge::Tensor({4}));
  for (double v : g.value(ge::early_fuse_embed(g, zero, zero, p))) EXPECT_EQ(v, 0.0);
}

TEST(EarlyFuse, LeftIdentityBlockReturnsLookupVector) {
  ge::ParameterStore s;
  const auto p = ge::add_early_fusion_params(s, 3, 1);
  p.weight->value().fill(0.0);
  for (std::size_t i = 0; i < 3; ++i) p.weight->value()[i * 6 + i] = 1.0;
  ge::Graph g;
  const Vec lookup = {0.5, 0.0, 2.25};
  const auto out = g.value(ge::early_fuse_embed(g, g.constant(ge::Tensor({3}, lookup)),
                                                g.constant(ge::Tensor({3}, Vec{9.0, -9.0, 4.0})), p));
  EXPECT_EQ(Vec(out.begin(), out.end()), lookup);
}

TEST(EarlyFuse, MatchesDenseProduct) {
  ge::CounterRng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    ge::ParameterStore s;
    const auto p = ge::add_early_fusion_params(s, 5, trial);
    for (auto& v : p.bias->value().values()) v = rng.uniform(-0.5, 0.5);
    Vec a(5), b(5), cat;
    for (auto& v : a) v = rng.uniform(-1, 1);
    for (auto& v : b) v = rng.uniform(-1, 1);
    cat = a;
    cat.insert(cat.end(), b.begin(), b.end());
    const Vec w(p.weight->value().values().begin(), p.weight->value().values().end());
    const Vec bias(p.bias->value().values().begin(), p.bias->value().values().end());
    Vec want = oracle::affine(cat, w, bias);
    for (auto& v : want) v = std::max(v, 0.0);
    ge::Graph g;
    const auto got = g.value(ge::early_fuse_embed(g, g.constant(ge::Tensor({5}, a)), g.constant(ge::Tensor({5}, b)), p));
    for (std::size_t i = 0; i < 5; ++i) ASSERT_NEAR(got[i], want[i], 1e-12);
  }
}

TEST(LateFuse, SimpleIdentities) {
  const ge::ProbDist p{{0.1, 0.6, 0.3}};
  EXPECT_EQ(ge::late_fuse_predict(p, p), p);
  const auto half = ge::late_fuse_predict(ge::ProbDist{{1.0, 0.0}}, ge::ProbDist{{0.0, 1.0}});
  EXPECT_EQ(half.probs, (Vec{0.5, 0.5}));
  EXPECT_THROW(ge::late_fuse_predict(p, ge::ProbDist{{0.5, 0.5}}), ge::ContractViolation);
}

// Every pair of points on the L=3 simplex at 0.05 resolution.
TEST(LateFuse, ArgmaxOverSimplexGrid) {
  std::vector<std::array<int, 3>> grid;
  for (int a = 0; a <= 20; ++a) {
    for (int b = 0; a + b <= 20; ++b) grid.push_back({a, b, 20 - a - b});
  }
  auto strict_argmax = [](const std::array<int, 3>& v) {
    int best = 0;
    for (int i = 1; i < 3; ++i) {
      if (v[i] > v[best]) best = i;
    }
    for (int i = 0; i < 3; ++i) {
      if (i != best && v[i] == v[best]) return -1;
    }
    return best;
  };
  std::size_t compared = 0, third_class = 0;
  for (const auto& p : grid) {
    for (const auto& q : grid) {
      const std::array<int, 3> sum = {p[0] + q[0], p[1] + q[1], p[2] + q[2]};
      const int j = strict_argmax(sum);
      if (j < 0) continue;  // exact tie in the fused scores; ordering then rests on rounding
      ++compared;
      const ge::ProbDist dp{{p[0] / 20.0, p[1] / 20.0, p[2] / 20.0}};
      const ge::ProbDist dq{{q[0] / 20.0, q[1] / 20.0, q[2] / 20.0}};
      const auto fused = ge::late_fuse_predict(dp, dq);
      ASSERT_EQ(fused.argmax(), static_cast<std::size_t>(j));
      ASSERT_NEAR(fused.sum(), 1.0, 1e-12);
      const int a = strict_argmax(p), b = strict_argmax(q);
      if (a >= 0 && a == b) ASSERT_EQ(j, a);
      if (a >= 0 && b >= 0 && j != a && j != b) {
        // The winner trails each model's leader by no more than it leads in the other model.
        ++third_class;
        ASSERT_LE(p[a] - p[j], q[j] - q[a]);
        ASSERT_LE(q[b] - q[j], p[j] - p[b]);
      }
    }
  }
  EXPECT_GT(compared, 40000u);
  EXPECT_GT(third_class, 0u);
}

TEST(AvgCharFrequency, Basics) {
  const ge::FrequencyTable table(std::map<char32_t, std::uint64_t>{{U'a', 4}, {U'b', 1}});
  EXPECT_EQ(ge::avg_char_frequency(U"xyz", table), 0.0);
  EXPECT_EQ(ge::avg_char_frequency(U"ax", table), 2.0);
  EXPECT_EQ(ge::avg_char_frequency(U"ab", table), 2.5);
  EXPECT_THROW(ge::avg_char_frequency(U"", table), ge::ContractViolation);
}

TEST(AvgCharFrequency, MatchesRecount) {
  ge::CounterRng rng(5);
  std::vector<std::u32string> train;
  for (int i = 0; i < 40; ++i) {
    std::u32string t;
    for (std::size_t k = 0, n = 1 + rng.below(6); k < n; ++k) t.push_back(U'a' + static_cast<char32_t>(rng.below(15)));
    train.push_back(t);
  }
  const auto table = ge::FrequencyTable::from_titles(train);
  for (int i = 0; i < 100; ++i) {
    std::u32string q;
    for (std::size_t k = 0, n = 1 + rng.below(8); k < n; ++k) q.push_back(U'a' + static_cast<char32_t>(rng.below(20)));
    ASSERT_EQ(ge::avg_char_frequency(q, table), oracle::avg_char_frequency(q, train));
  }
}

struct Pair {
  ge::synthetic::LabeledCorpus corpus = ge::synthetic::overfit_fixture();
  ge::FrequencyTable table = ge::char_frequency_table(corpus.instances);
  std::shared_ptr<const ge::GlyphProvider> glyphs = std::make_shared<const ge::GlyphProvider>(ge::ProceduralSource{});
  ge::Model lookup = make(ge::ModelKind::lookup);
  ge::Model visual = make(ge::ModelKind::visual);

  ge::Model make(ge::ModelKind kind) {
    ge::ModelConfig cfg;
    cfg.kind = kind;
    return ge::Model(cfg, table, corpus.categories, glyphs, 3);
  }
};

TEST(Fallback, RoutesOnAverageFrequency) {
  Pair m;
  const ge::FallbackPolicy zero{0.0};
  const std::u32string unseen = {0xE400, 0xE401};
  ASSERT_FALSE(m.table.contains(unseen[0]) || m.table.contains(unseen[1]));
  auto r = ge::fallback_predict(unseen, m.lookup, m.visual, zero, m.table);
  EXPECT_EQ(r.route, ge::Route::visual);
  EXPECT_EQ(r.probs, m.visual.predict(unseen));
  EXPECT_EQ(r.avg_frequency, 0.0);

  const std::u32string mixed = {m.corpus.instances[0].title[0], 0xE400};
  r = ge::fallback_predict(mixed, m.lookup, m.visual, zero, m.table);
  EXPECT_EQ(r.route, ge::Route::lookup);
  EXPECT_EQ(r.probs, m.lookup.predict(mixed));
  EXPECT_GT(r.avg_frequency, 0.0);

  const ge::FallbackPolicy always{std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < 5; ++i) {
    const auto& t = m.corpus.instances[i].title;
    const auto a = ge::fallback_predict(t, m.lookup, m.visual, always, m.table);
    EXPECT_EQ(a.route, ge::Route::visual);
    EXPECT_EQ(a.probs, m.visual.predict(t));
  }

  // At the threshold itself the visual side wins.
  const double f = ge::avg_char_frequency(mixed, m.table);
  EXPECT_EQ(ge::fallback_predict(mixed, m.lookup, m.visual, ge::FallbackPolicy{f}, m.table).route, ge::Route::visual);
}

}  // namespace
