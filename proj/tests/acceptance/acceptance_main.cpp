// SPDX-License-Identifier: Apache-2.0
// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "glyphembed/analysis.hpp"
#include "glyphembed/checkpoint.hpp"
#include "glyphembed/classifier.hpp"
#include "glyphembed/corpus.hpp"
#include "glyphembed/dataset.hpp"
#include "glyphembed/embedders.hpp"
#include "glyphembed/fusion.hpp"
#include "glyphembed/graph.hpp"
#include "glyphembed/model.hpp"
#include "glyphembed/procedural.hpp"
#include "glyphembed/rng.hpp"
#include "glyphembed/synthetic.hpp"
#include "glyphembed/utf8.hpp"
#include "support/gradcheck.hpp"
#include "support/oracles.hpp"

namespace ge = glyphembed;
namespace fs = std::filesystem;

namespace {

const std::string kDataDir = GLYPHEMBED_TEST_DATA_DIR;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      pass = false;
      detail += (detail.empty() ? "" : "; ") + what;
    }
  }
  void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream s;
  s.precision(precision);
  s << v;
  return s.str();
}

ge::Tensor random_tensor(ge::CounterRng& rng, ge::Shape shape, double lo = -1.0, double hi = 1.0) {
  ge::Tensor t(std::move(shape));
  for (double& v : t.values()) v = rng.uniform(lo, hi);
  return t;
}

std::vector<double> to_vec(std::span<const double> s) { return {s.begin(), s.end()}; }

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// ---------------------------------------------------------------------------------------
// 1

Outcome shape_oracle() {
  Outcome out;
  ge::ParameterStore store;
  const auto params = ge::add_visual_params(store, 128, 3);
  ge::Graph g;
  std::vector<ge::Shape> trace;
  const ge::Var e = ge::visual_embed(g, params, ge::procedural::composite_glyph(0, 0), &trace);
  const std::vector<ge::Shape> expected = {{32, 34, 34}, {32, 17, 17}, {32, 15, 15}, {32, 7, 7},
                                           {32, 5, 5},   {800},        {128},        {128}};
  out.require(trace == expected, "stage shapes differ from 34/17/15/7/5 -> 800 -> 128");
  out.require(g.shape(e) == ge::Shape{128}, "embedding width is not 128");
  std::string shapes;
  for (const auto& s : trace) shapes += ge::shape_string(s) + " ";
  out.note("stages " + shapes);
  return out;
}

// ---------------------------------------------------------------------------------------
// 2

using LossBuilder = std::function<ge::Var(ge::Graph&)>;

struct OpCase {
  std::string name;
  std::function<LossBuilder(ge::ParameterStore&, ge::CounterRng&)> make;
};

// Scalar readout: dot with fixed random weights so every output coordinate matters.
ge::Var readout(ge::Graph& g, ge::Var y, const ge::Tensor& w) { return g.dot(g.reshape(y, {w.size()}), g.constant(w)); }

ge::Parameter& rand_param(ge::ParameterStore& s, ge::CounterRng& rng, const std::string& name, ge::Shape shape,
                          double lo = -1.0, double hi = 1.0) {
  ge::Parameter& p = s.add(name, shape);
  p.value() = random_tensor(rng, shape, lo, hi);
  return p;
}

// Values bounded away from zero so ReLU is differentiable at every coordinate.
ge::Parameter& off_zero_param(ge::ParameterStore& s, ge::CounterRng& rng, const std::string& name, ge::Shape shape) {
  ge::Parameter& p = s.add(name, shape);
  for (double& v : p.value().values()) {
    const double mag = rng.uniform(0.05, 1.0);
    v = rng.below(2) ? mag : -mag;
  }
  return p;
}

std::vector<OpCase> op_cases() {
  std::vector<OpCase> cases;
  cases.push_back({"conv2d", [](ge::ParameterStore& s, ge::CounterRng& rng) -> LossBuilder {
                     auto& x = rand_param(s, rng, "x", {2, 6, 5});
                     auto& k = rand_param(s, rng, "k", {3, 2, 3, 3});
                     auto& b = rand_param(s, rng, "b", {3});
                     auto w = random_tensor(rng, {3 * 4 * 3});
                     return [&, w](ge::Graph& g) {
                       return readout(g, g.conv2d(g.param(x), g.param(k), g.param(b)), w);
                     };
                   }});
  cases.push_back({"maxpool2d", [](ge::ParameterStore& s, ge::CounterRng& rng) -> LossBuilder {
                     auto& x = rand_param(s, rng, "x", {2, 5, 6});
                     auto w = random_tensor(rng, {2 * 2 * 3});
                     return [&, w](ge::Graph& g) { return readout(g, g.maxpool2d(g.param(x)), w); };
                   }});
  cases.push_back({"affine", [](ge::ParameterStore& s, ge::CounterRng& rng) -> LossBuilder {
                     auto& x = rand_param(s, rng, "x", {4});
                     auto& W = rand_param(s, rng, "W", {3, 4});
                     auto& b = rand_param(s, rng, "b", {3});
                     auto w = random_tensor(rng, {3});
                     return [&, w](ge::Graph& g) { return readout(g, g.affine(g.param(x), g.param(W), g.param(b)), w); };
                   }});
  cases.push_back({"matvec", [](ge::ParameterStore& s, ge::CounterRng& rng) -> LossBuilder {
                     auto& x = rand_param(s, rng, "x", {5});
                     auto& W = rand_param(s, rng, "W", {2, 5});
                     auto w = random_tensor(rng, {2});
                     return [&, w](ge::Graph& g) { return readout(g, g.matvec(g.param(W), g.param(x)), w); };
                   }});
  for (const char* name : {"add", "sub", "mul"}) {
    cases.push_back({name, [name = std::string(name)](ge::ParameterStore& s, ge::CounterRng& rng) -> LossBuilder {
                       auto& a = rand_param(s, rng, "a", {6});
                       auto& b = rand_param(s, rng, "b", {6});
                       auto w = random_tensor(rng, {6});
                       return [&, w, name](ge::Graph& g) {
                         const ge::Var x = g.param(a), y = g.param(b);
                         const ge::Var r = name == "add" ? g.add(x, y) : name == "sub" ? g.sub(x, y) : g.mul(x, y);
                         return readout(g, r, w);
                       };
                     }});
  }
  cases.push_back({"lerp", [](ge::ParameterStore& s, ge::CounterRng& rng) -> LossBuilder {
                     auto& a = rand_param(s, rng, "a", {5});
                     auto& b = rand_param(s, rng, "b", {5});
                     auto& t = rand_param(s, rng, "t", {5}, 0.0, 1.0);
                     auto w = random_tensor(rng, {5});
                     return [&, w](ge::Graph& g) { return readout(g, g.lerp(g.param(a), g.param(b), g.param(t)), w); };
                   }});
  cases.push_back({"relu", [](ge::ParameterStore& s, ge::CounterRng& rng) -> LossBuilder {
                     auto& x = off_zero_param(s, rng, "x", {8});
                     auto w = random_tensor(rng, {8});
                     return [&, w](ge::Graph& g) { return readout(g, g.relu(g.param(x)), w); };
                   }});
  cases.push_back({"sigmoid", [](ge::ParameterStore& s, ge::CounterRng& rng) -> LossBuilder {
                     auto& x = rand_param(s, rng, "x", {8}, -3.0, 3.0);
                     auto w = random_tensor(rng, {8});
                     return [&, w](ge::Graph& g) { return readout(g, g.sigmoid(g.param(x)), w); };
                   }});
  cases.push_back({"tanh", [](ge::ParameterStore& s, ge::CounterRng& rng) -> LossBuilder {
                     auto& x = rand_param(s, rng, "x", {8}, -3.0, 3.0);
                     auto w = random_tensor(rng, {8});
                     return [&, w](ge::Graph& g) { return readout(g, g.tanh(g.param(x)), w); };
                   }});
  cases.push_back({"concat", [](ge::ParameterStore& s, ge::CounterRng& rng) -> LossBuilder {
                     auto& a = rand_param(s, rng, "a", {3});
                     auto& b = rand_param(s, rng, "b", {4});
                     auto w = random_tensor(rng, {7});
                     return [&, w](ge::Graph& g) { return readout(g, g.concat(g.param(a), g.param(b)), w); };
                   }});
  cases.push_back({"reshape", [](ge::ParameterStore& s, ge::CounterRng& rng) -> LossBuilder {
                     auto& a = rand_param(s, rng, "a", {2, 3, 2});
                     auto w = random_tensor(rng, {12});
                     return [&, w](ge::Graph& g) { return readout(g, g.reshape(g.param(a), {12}), w); };
                   }});
  cases.push_back({"softmax", [](ge::ParameterStore& s, ge::CounterRng& rng) -> LossBuilder {
                     auto& z = rand_param(s, rng, "z", {5}, -2.0, 2.0);
                     auto w = random_tensor(rng, {5});
                     return [&, w](ge::Graph& g) { return readout(g, g.softmax(g.param(z)), w); };
                   }});
  cases.push_back({"cross_entropy", [](ge::ParameterStore& s, ge::CounterRng& rng) -> LossBuilder {
                     auto& z1 = rand_param(s, rng, "z1", {4}, -2.0, 2.0);
                     auto& z2 = rand_param(s, rng, "z2", {4}, -2.0, 2.0);
                     std::vector<ge::Tensor> targets(2, ge::Tensor({4}));
                     targets[0][rng.below(4)] = 1.0;
                     targets[1][rng.below(4)] = 1.0;
                     return [&, targets](ge::Graph& g) {
                       std::vector<ge::Var> probs = {g.softmax(g.param(z1)), g.softmax(g.param(z2))};
                       return g.cross_entropy(probs, targets);
                     };
                   }});
  cases.push_back({"softmax_cross_entropy", [](ge::ParameterStore& s, ge::CounterRng& rng) -> LossBuilder {
                     auto& z1 = rand_param(s, rng, "z1", {6}, -2.0, 2.0);
                     auto& z2 = rand_param(s, rng, "z2", {6}, -2.0, 2.0);
                     auto& z3 = rand_param(s, rng, "z3", {6}, -2.0, 2.0);
                     std::vector<std::size_t> labels = {rng.below(6), rng.below(6), rng.below(6)};
                     return [&, labels](ge::Graph& g) {
                       std::vector<ge::Var> logits = {g.param(z1), g.param(z2), g.param(z3)};
                       return g.softmax_cross_entropy(logits, labels);
                     };
                   }});
  cases.push_back({"sum", [](ge::ParameterStore& s, ge::CounterRng& rng) -> LossBuilder {
                     auto& a = rand_param(s, rng, "a", {7});
                     return [&](ge::Graph& g) { return g.mul(g.sum(g.param(a)), g.sum(g.param(a))); };
                   }});
  cases.push_back({"sum_squares", [](ge::ParameterStore& s, ge::CounterRng& rng) -> LossBuilder {
                     auto& a = rand_param(s, rng, "a", {7});
                     return [&](ge::Graph& g) { return g.sum_squares(g.param(a)); };
                   }});
  cases.push_back({"dot", [](ge::ParameterStore& s, ge::CounterRng& rng) -> LossBuilder {
                     auto& a = rand_param(s, rng, "a", {5});
                     auto& b = rand_param(s, rng, "b", {5});
                     return [&](ge::Graph& g) { return g.dot(g.param(a), g.param(b)); };
                   }});
  cases.push_back({"gather_row", [](ge::ParameterStore& s, ge::CounterRng& rng) -> LossBuilder {
                     auto& t = rand_param(s, rng, "table", {4, 3});
                     const std::size_t r1 = rng.below(4), r2 = rng.below(4);
                     auto w = random_tensor(rng, {3});
                     return [&, w, r1, r2](ge::Graph& g) {
                       return readout(g, g.mul(g.gather_row(t, r1), g.gather_row(t, r2)), w);
                     };
                   }});
  cases.push_back({"shared_node", [](ge::ParameterStore& s, ge::CounterRng& rng) -> LossBuilder {
                     // One node feeding two consumers: both contributions must accumulate.
                     auto& a = rand_param(s, rng, "a", {4});
                     auto w = random_tensor(rng, {4});
                     return [&, w](ge::Graph& g) {
                       const ge::Var h = g.tanh(g.param(a));
                       return readout(g, g.add(g.mul(h, h), g.sigmoid(h)), w);
                     };
                   }});
  return cases;
}

struct ModelFixture {
  std::shared_ptr<const ge::GlyphProvider> glyphs = std::make_shared<const ge::GlyphProvider>(ge::ProceduralSource{});
  ge::FrequencyTable table;
  std::vector<std::string> categories = ge::default_categories();

  ModelFixture() {
    std::vector<std::u32string> titles;
    for (std::size_t s = 0; s < 4; ++s) titles.push_back({ge::procedural::composite_codepoint(s, s + 1)});
    table = ge::FrequencyTable::from_titles(titles);
  }
};

ge::Model small_model(const ModelFixture& fx, ge::ModelKind kind, std::uint64_t seed) {
  ge::ModelConfig cfg;
  cfg.kind = kind;
  cfg.seq_len = 4;
  return ge::Model(cfg, fx.table, fx.categories, fx.glyphs, seed);
}

Outcome gradient_suite() {
  Outcome out;
  std::size_t checked = 0, kinks = 0;
  for (const auto& op : op_cases()) {
    for (std::uint64_t trial = 0; trial < 3; ++trial) {
      ge::ParameterStore store;
      ge::CounterRng rng = ge::CounterRng(2024).split(trial * 101 + op.name.size());
      const auto loss = op.make(store, rng);
      const auto rep = gradcheck::check(store, loss, trial);
      checked += rep.checked;
      kinks += rep.kinks;
      out.require(rep.ok(), op.name + " trial " + std::to_string(trial) + ": " + rep.summary());
    }
  }

  ModelFixture fx;
  ge::CounterRng rng(77);
  const std::vector<ge::ModelKind> kinds = {ge::ModelKind::lookup, ge::ModelKind::visual, ge::ModelKind::early};
  double worst = 0.0;
  for (ge::ModelKind kind : kinds) {
    for (std::uint64_t trial = 0; trial < 3; ++trial) {
      ge::Model model = small_model(fx, kind, 100 + trial);
      // Biases start at zero; perturb every parameter so no unit sits exactly on a ReLU kink.
      for (std::size_t i = 0; i < model.params().size(); ++i) {
        for (double& v : model.params()[i].value().values()) v += rng.uniform(-0.05, 0.05);
      }
      // A repeated seen character, an unseen one, and a PAD position.
      const char32_t seen = ge::procedural::composite_codepoint(trial, trial + 1);
      const char32_t unseen = ge::procedural::composite_codepoint(7 + trial, 3);
      const std::u32string title = {seen, unseen, seen};
      const std::size_t label = rng.below(fx.categories.size());
      // Procedural glyphs have exactly flat background, so many max-pool windows hold ties and
      // the loss has kinks at the evaluation point. Faint pixel noise removes the ties.
      std::map<char32_t, ge::GlyphImage> noisy;
      for (char32_t c : title) {
        ge::GlyphImage img = fx.glyphs->render(c);
        for (double& v : img.pixels()) v = std::clamp(v * 0.8 + rng.uniform(0.0, 0.2), 0.0, 1.0);
        noisy[c] = img;
      }
      const auto loss = [&](ge::Graph& g) {
        std::map<char32_t, ge::Var> memo;
        auto embed = [&](std::optional<char32_t> token) {
          if (kind == ge::ModelKind::lookup) {
            ge::Model::EmbedCache cache(g);
            return model.embed(cache, token);
          }
          const char32_t key = token ? *token : U'\0';
          if (auto it = memo.find(key); it != memo.end()) return it->second;
          const ge::Var v = ge::visual_embed(g, model.visual_params(), token ? noisy.at(*token) : ge::GlyphImage{});
          ge::Var e = v;
          if (kind == ge::ModelKind::early) {
            const auto id = token ? model.vocab().id(*token) : ge::CharVocab::kPad;
            e = ge::early_fuse_embed(g, ge::lookup_embed(g, model.lookup_params(), id), v, model.fusion_params());
          }
          memo.emplace(key, e);
          return e;
        };
        std::vector<ge::Var> embeds;
        for (const auto& token : ge::pad_or_truncate(title, model.config().seq_len)) embeds.push_back(embed(token));
        std::vector<ge::Var> logits = {ge::head_logits(g, model.head_params(), ge::encode_sequence(g, model.gru_params(), embeds))};
        std::vector<std::size_t> labels = {label};
        return g.softmax_cross_entropy(logits, labels);
      };
      const auto rep = gradcheck::check(model.params(), loss, trial, 10);
      checked += rep.checked;
      kinks += rep.kinks;
      worst = std::max(worst, rep.max_rel_error);
      out.require(rep.ok(), std::string(ge::to_string(kind)) + " model trial " + std::to_string(trial) + ": " +
                                rep.summary());
    }
  }
  out.note(std::to_string(checked) + " coordinates checked, " + std::to_string(kinks) +
           " skipped as straddling a ReLU/max-pool switch, worst model rel err " + fmt(worst, 3));
  return out;
}

// ---------------------------------------------------------------------------------------
// 3

Outcome oracle_equivalence() {
  Outcome out;
  constexpr int kTrials = 100;
  constexpr double kTol = 1e-12;
  ge::CounterRng rng(31337);
  double worst_conv = 0, worst_pool = 0, worst_aff = 0, worst_sm = 0, worst_ce = 0, worst_gru = 0;
  std::size_t freq_mismatch = 0, label_mismatch = 0, knn_mismatch = 0;

  for (int t = 0; t < kTrials; ++t) {
    // conv2d
    {
      const std::size_t C = 1 + rng.below(3), H = 3 + rng.below(5), W = 3 + rng.below(5), O = 1 + rng.below(4);
      auto x = random_tensor(rng, {C, H, W}), k = random_tensor(rng, {O, C, 3, 3}), b = random_tensor(rng, {O});
      ge::Graph g;
      const auto y = g.conv2d(g.constant(x), g.constant(k), g.constant(b));
      worst_conv = std::max(worst_conv, max_abs_diff(g.value(y), oracle::conv2d(to_vec(x.values()), C, H, W,
                                                                                to_vec(k.values()), O, to_vec(b.values()))));
    }
    // maxpool2d
    {
      const std::size_t C = 1 + rng.below(3), H = 2 + rng.below(7), W = 2 + rng.below(7);
      auto x = random_tensor(rng, {C, H, W});
      ge::Graph g;
      const auto y = g.maxpool2d(g.constant(x));
      worst_pool = std::max(worst_pool, max_abs_diff(g.value(y), oracle::maxpool(to_vec(x.values()), C, H, W)));
    }
    // affine
    {
      const std::size_t M = 1 + rng.below(6), N = 1 + rng.below(6);
      auto x = random_tensor(rng, {N}), W = random_tensor(rng, {M, N}), b = random_tensor(rng, {M});
      ge::Graph g;
      const auto y = g.affine(g.constant(x), g.constant(W), g.constant(b));
      worst_aff = std::max(worst_aff, max_abs_diff(g.value(y), oracle::affine(to_vec(x.values()), to_vec(W.values()),
                                                                              to_vec(b.values()))));
    }
    // softmax and cross-entropy
    {
      const std::size_t L = 1 + rng.below(8), B = 1 + rng.below(5);
      ge::Graph g;
      std::vector<ge::Var> logits, probs;
      std::vector<oracle::Vec> ref_probs;
      std::vector<std::size_t> labels;
      std::vector<ge::Tensor> targets;
      for (std::size_t i = 0; i < B; ++i) {
        auto z = random_tensor(rng, {L}, -3.0, 3.0);
        logits.push_back(g.constant(z));
        probs.push_back(g.softmax(logits.back()));
        ref_probs.push_back(oracle::softmax_unshifted(to_vec(z.values())));
        worst_sm = std::max(worst_sm, max_abs_diff(g.value(probs.back()), ref_probs.back()));
        labels.push_back(rng.below(L));
        ge::Tensor t({L});
        t[labels.back()] = 1.0;
        targets.push_back(t);
      }
      const double ref = oracle::cross_entropy(ref_probs, labels);
      worst_ce = std::max(worst_ce, std::abs(g.scalar(g.cross_entropy(probs, targets)) - ref));
      worst_ce = std::max(worst_ce, std::abs(g.scalar(g.softmax_cross_entropy(logits, labels)) - ref));
    }
    // GRU step
    {
      const std::size_t dc = 1 + rng.below(5), dh = 1 + rng.below(5);
      ge::ParameterStore store;
      const auto gp = ge::add_gru_params(store, dc, dh, 9);
      for (std::size_t i = 0; i < store.size(); ++i) store[i].value() = random_tensor(rng, store[i].shape());
      oracle::Gru ref{dc, dh, to_vec(gp.w_z->value().values()), to_vec(gp.w_r->value().values()),
                      to_vec(gp.w_h->value().values()), to_vec(gp.u_z->value().values()),
                      to_vec(gp.u_r->value().values()), to_vec(gp.u_h->value().values()),
                      to_vec(gp.b_z->value().values()), to_vec(gp.b_r->value().values()),
                      to_vec(gp.b_h->value().values())};
      auto h = random_tensor(rng, {dh}), x = random_tensor(rng, {dc});
      ge::Graph g;
      const auto y = ge::gru_step(g, gp, g.constant(h), g.constant(x));
      worst_gru = std::max(worst_gru, max_abs_diff(g.value(y), oracle::gru_step(ref, to_vec(h.values()), to_vec(x.values()))));
    }
    // avg char frequency on a toy corpus over a 6-letter alphabet
    {
      std::vector<std::u32string> train(1 + rng.below(6));
      for (auto& s : train) {
        s.resize(1 + rng.below(5));
        for (auto& c : s) c = U'a' + static_cast<char32_t>(rng.below(6));
      }
      const auto table = ge::FrequencyTable::from_titles(train);
      std::u32string q(1 + rng.below(6), U'a');
      for (auto& c : q) c = U'a' + static_cast<char32_t>(rng.below(8));
      freq_mismatch += ge::avg_char_frequency(q, table) != oracle::avg_char_frequency(q, train) ? 1 : 0;
    }
    // min-depth labeling on a random 50-node DAG with 3 roots
    {
      std::vector<std::string> roots = {"R0", "R1", "R2"};
      std::vector<std::string> nodes = roots;
      for (int i = 3; i < 50; ++i) nodes.push_back("n" + std::to_string(i));
      std::vector<std::pair<std::string, std::string>> edges;
      ge::CategoryGraph graph(roots);
      for (std::size_t child = 3; child < nodes.size(); ++child) {
        const std::size_t parents = rng.below(3);
        for (std::size_t p = 0; p < parents; ++p) {
          const auto parent = rng.below(child);
          edges.emplace_back(nodes[parent], nodes[child]);
        }
      }
      ge::CounterRng(rng.next_u64()).shuffle(edges);
      for (const auto& [a, b] : edges) graph.add_edge(a, b);
      ge::Memberships members;
      for (int a = 0; a < 30; ++a) {
        std::vector<std::string> cats;
        for (std::size_t k = 0, n = 1 + rng.below(3); k < n; ++k) {
          const auto& name = nodes[rng.below(nodes.size())];
          if (graph.contains(name)) cats.push_back(name);
        }
        if (!cats.empty()) members.emplace_back("article" + std::to_string(a), cats);
      }
      const auto got = ge::assign_labels_min_depth(graph, members);
      const auto want = oracle::min_depth_labels(edges, roots, members);
      bool same = got.size() == want.size();
      for (const auto& a : got) {
        auto it = want.find(a.title);
        same = same && it != want.end() && it->second.first == a.label && it->second.second == a.depth;
      }
      label_mismatch += same ? 0 : 1;
    }
    // k-NN ranking, with duplicated rows to exercise ties
    {
      const std::size_t n = 4 + rng.below(8), d = 1 + rng.below(4);
      std::vector<std::pair<char32_t, std::vector<double>>> table;
      for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> v(d);
        for (auto& x : v) x = static_cast<double>(rng.below(4));
        table.emplace_back(static_cast<char32_t>(0x4E00 + rng.below(64) * 7 + i), v);
      }
      const auto& [query, qvec] = table[rng.below(n)];
      const std::size_t k = 1 + rng.below(n - 1);
      const auto got = ge::knn_rank(table, qvec, query, k);
      const auto want = oracle::knn(table, qvec, query, k);
      bool same = got.size() == want.size();
      for (std::size_t i = 0; same && i < got.size(); ++i) {
        same = got[i].codepoint == want[i].first && got[i].distance == want[i].second;
      }
      knn_mismatch += same ? 0 : 1;
    }
  }
  out.require(worst_conv <= kTol, "conv2d max diff " + fmt(worst_conv));
  out.require(worst_pool == 0.0, "maxpool2d max diff " + fmt(worst_pool));
  out.require(worst_aff <= kTol, "affine max diff " + fmt(worst_aff));
  out.require(worst_sm <= kTol, "softmax max diff " + fmt(worst_sm));
  out.require(worst_ce <= kTol, "cross-entropy max diff " + fmt(worst_ce));
  out.require(worst_gru <= kTol, "GRU step max diff " + fmt(worst_gru));
  out.require(freq_mismatch == 0, std::to_string(freq_mismatch) + " avg-frequency mismatches");
  out.require(label_mismatch == 0, std::to_string(label_mismatch) + " labeling mismatches");
  out.require(knn_mismatch == 0, std::to_string(knn_mismatch) + " k-NN mismatches");
  out.note(std::to_string(kTrials) + " trials x 9 oracles; max float diff " +
           fmt(std::max({worst_conv, worst_aff, worst_sm, worst_ce, worst_gru}), 3));
  return out;
}

// ---------------------------------------------------------------------------------------
// 4

Outcome overfit_capacity() {
  Outcome out;
  const auto categories = ge::default_categories();
  const auto instances = ge::load_corpus_tsv(kDataDir + "/overfit64.tsv", categories);
  out.require(instances.size() == 64, "fixture does not hold 64 instances");
  auto glyphs = std::make_shared<const ge::GlyphProvider>(ge::ProceduralSource{});
  for (ge::ModelKind kind : {ge::ModelKind::lookup, ge::ModelKind::visual}) {
    ge::TrainConfig cfg;
    cfg.kind = kind;
    cfg.batch_size = 16;
    ge::Model model(ge::model_config(cfg), ge::char_frequency_table(instances), categories, glyphs, cfg.seed);
    ge::AdamState adam;
    double acc = 0.0;
    std::size_t epoch = 0;
    while (epoch < 200 && acc < 0.95) {
      ge::train_epoch(model, adam, instances, cfg, ++epoch);
      acc = ge::evaluate_accuracy(model, instances);
    }
    out.require(acc >= 0.95, std::string(ge::to_string(kind)) + " reached only " + fmt(acc));
    out.note(std::string(ge::to_string(kind)) + " train acc " + fmt(acc) + " after " + std::to_string(epoch) +
             " epochs");
  }
  return out;
}

// ---------------------------------------------------------------------------------------
// 5-8 share one rare-character experiment

struct RareExperiment {
  ge::synthetic::LabeledCorpus corpus;
  std::vector<ge::Instance> train, valid, test;
  std::shared_ptr<const ge::GlyphProvider> glyphs;
  std::optional<ge::Model> lookup, visual;
  double lookup_acc = 0.0, visual_acc = 0.0;
};

RareExperiment& rare_experiment() {
  static std::optional<RareExperiment> ex;
  if (ex) return *ex;
  ex.emplace();
  ex->corpus = ge::synthetic::radical_corpus({});
  for (const auto& inst : ex->corpus.instances) {
    (inst.split == ge::Split::train ? ex->train : inst.split == ge::Split::valid ? ex->valid : ex->test).push_back(inst);
  }
  ex->glyphs = std::make_shared<const ge::GlyphProvider>(ge::ProceduralSource{});
  const auto table = ge::char_frequency_table(ex->corpus.instances);
  for (ge::ModelKind kind : {ge::ModelKind::lookup, ge::ModelKind::visual}) {
    ge::TrainConfig cfg;
    cfg.kind = kind;
    cfg.batch_size = 32;
    cfg.chunk_size = 32;
    cfg.epochs = 6;
    ge::Model model(ge::model_config(cfg), table, ex->corpus.categories, ex->glyphs, cfg.seed);
    ge::train_model(model, ex->train, ex->valid, cfg);
    const double acc = ge::evaluate_accuracy(model, ex->test);
    if (kind == ge::ModelKind::lookup) {
      ex->lookup_acc = acc;
      ex->lookup.emplace(std::move(model));
    } else {
      ex->visual_acc = acc;
      ex->visual.emplace(std::move(model));
    }
  }
  return *ex;
}

Outcome rare_generalization() {
  Outcome out;
  auto& ex = rare_experiment();
  std::size_t leaked = 0;
  const auto& table = ex.lookup->frequencies();
  for (const auto& inst : ex.test) {
    for (char32_t c : inst.title) leaked += table.contains(c) ? 1 : 0;
  }
  const double chance = 1.0 / 12.0;
  out.require(leaked == 0, std::to_string(leaked) + " test characters occur in training");
  out.require(ex.visual_acc > 2.0 * chance, "visual test accuracy " + fmt(ex.visual_acc) + " <= 2/12");
  out.require(std::abs(ex.lookup_acc - chance) <= 0.05, "lookup test accuracy " + fmt(ex.lookup_acc) + " not within 0.05 of 1/12");
  out.note("visual " + fmt(ex.visual_acc) + ", lookup " + fmt(ex.lookup_acc) + ", chance " + fmt(chance) + ", " +
           std::to_string(ex.test.size()) + " test titles of unseen characters");
  return out;
}

Outcome fusion_identities() {
  Outcome out;
  auto& ex = rare_experiment();
  const auto& table = ex.lookup->frequencies();
  double worst_mean = 0.0, worst_sum = 0.0;
  std::size_t misrouted = 0, not_verbatim = 0, routed_visual = 0;

  // Test titles are entirely unseen; valid titles entirely seen; mixed titles splice both.
  std::vector<std::u32string> titles;
  for (std::size_t i = 0; i < 40; ++i) {
    titles.push_back(ex.test[i * 3 % ex.test.size()].title);
    titles.push_back(ex.valid[i * 2 % ex.valid.size()].title);
    titles.push_back(ex.test[i % ex.test.size()].title.substr(0, 1) + ex.valid[i % ex.valid.size()].title);
  }
  for (const auto& title : titles) {
    const auto pl = ex.lookup->predict(title);
    const auto pv = ex.visual->predict(title);
    const auto fused = ge::late_fuse_predict(pl, pv);
    for (std::size_t j = 0; j < fused.size(); ++j) worst_mean = std::max(worst_mean, std::abs(fused[j] - (pl[j] + pv[j]) / 2));
    worst_sum = std::max(worst_sum, std::abs(fused.sum() - 1.0));

    const auto fb = ge::fallback_predict(title, *ex.lookup, *ex.visual, ge::FallbackPolicy{0.0}, table);
    const bool all_unseen = std::none_of(title.begin(), title.end(), [&](char32_t c) { return table.contains(c); });
    misrouted += (fb.route == ge::Route::visual) != all_unseen ? 1 : 0;
    not_verbatim += (fb.probs == pv || fb.probs == pl) && (fb.probs == (fb.route == ge::Route::visual ? pv : pl)) ? 0 : 1;
    routed_visual += fb.route == ge::Route::visual ? 1 : 0;
  }
  out.require(worst_mean <= 1e-12, "late fusion deviates from the mean by " + fmt(worst_mean));
  out.require(worst_sum <= 1e-9, "late fusion sum off by " + fmt(worst_sum));
  out.require(misrouted == 0, std::to_string(misrouted) + " titles misrouted");
  out.require(not_verbatim == 0, std::to_string(not_verbatim) + " fallback outputs not verbatim");
  out.note(std::to_string(titles.size()) + " titles, " + std::to_string(routed_visual) + " routed to visual");
  return out;
}

Outcome rarity_analytics() {
  Outcome out;
  auto& ex = rare_experiment();
  std::vector<const ge::Instance*> pool;
  for (const auto& i : ex.test) pool.push_back(&i);
  for (const auto& i : ex.valid) pool.push_back(&i);
  for (const ge::Model* model : {&*ex.lookup, &*ex.visual}) {
    const std::string name(ge::to_string(model->kind()));
    std::vector<ge::EvalRecord> records;
    for (const auto* inst : pool) {
      records.push_back(ge::make_record(inst->title, inst->label, model->predict(inst->title),
                                        ge::avg_char_frequency(inst->title, model->frequencies())));
    }
    const auto curve = ge::cumulative_rarity_curve(records);
    bool monotone = true;
    for (std::size_t i = 1; i < curve.size(); ++i) {
      monotone = monotone && curve[i].cumulative_correct >= curve[i - 1].cumulative_correct;
    }
    const auto total = static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [](const auto& r) { return r.correct(); }));
    out.require(monotone, name + " curve decreases somewhere");
    out.require(curve.back().cumulative_correct == total, name + " curve does not end at the total correct count");
    out.require(ge::k_rarest_accuracy(records, records.size()) == ge::accuracy(records),
                name + " k = |records| differs from accuracy");
    const std::vector<ge::EvalRecord> test_only(records.begin(),
                                                records.begin() + static_cast<std::ptrdiff_t>(ex.test.size()));
    out.require(ge::k_rarest_accuracy(test_only, test_only.size()) == ge::accuracy(test_only),
                name + " k = |test| differs from accuracy");
    out.note(name + ": " + std::to_string(total) + "/" + std::to_string(records.size()) + " correct, k-rarest(" +
             std::to_string(ex.test.size()) + ") = " + fmt(ge::k_rarest_accuracy(records, ex.test.size())));
  }
  return out;
}

Outcome occlusion_sanity() {
  Outcome out;
  auto& ex = rare_experiment();
  const auto blank = ge::occlusion_heatmap(*ex.visual, ge::GlyphImage{});
  out.require(std::all_of(blank.distances.begin(), blank.distances.end(), [](double d) { return d == 0.0; }),
              "blank glyph has nonzero distances");
  out.require(blank.overlay.blank(), "blank glyph has a nonzero heatmap");

  std::set<char32_t> chars;
  for (const auto& inst : ex.test) chars.insert(inst.title.begin(), inst.title.end());
  std::size_t hits = 0;
  for (char32_t c : chars) {
    const auto h = ge::occlusion_heatmap(*ex.visual, ex.glyphs->render(c));
    hits += h.max_corner() == ge::top_left ? 1 : 0;
  }
  const double rate = static_cast<double>(hits) / static_cast<double>(chars.size());
  out.require(rate >= 0.8, "top-left corner is maximal for only " + fmt(rate));
  out.note("top-left maximal on " + std::to_string(hits) + "/" + std::to_string(chars.size()) + " held-out glyphs");
  return out;
}

// ---------------------------------------------------------------------------------------
// 9

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism_persistence() {
  Outcome out;
  const auto fixture = ge::synthetic::overfit_fixture();
  auto glyphs = std::make_shared<const ge::GlyphProvider>(ge::ProceduralSource{});
  for (ge::ModelKind kind : {ge::ModelKind::lookup, ge::ModelKind::visual, ge::ModelKind::early}) {
    ge::TrainConfig cfg;
    cfg.kind = kind;
    cfg.batch_size = 16;
    cfg.seed = 5;
    std::vector<std::vector<double>> runs;
    for (int run = 0; run < 2; ++run) {
      ge::Model model(ge::model_config(cfg), ge::char_frequency_table(fixture.instances), fixture.categories, glyphs,
                      cfg.seed);
      ge::AdamState adam;
      auto report = ge::train_epoch(model, adam, fixture.instances, cfg, 1);
      report.batch_losses.resize(3);
      runs.push_back(report.batch_losses);
    }
    out.require(std::memcmp(runs[0].data(), runs[1].data(), 3 * sizeof(double)) == 0,
                std::string(ge::to_string(kind)) + " first-3-step losses differ between runs");
  }

  const fs::path tmp = fs::temp_directory_path() / ("glyphembed_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(tmp);
  {
    ge::TrainConfig cfg;
    cfg.kind = ge::ModelKind::early;
    cfg.batch_size = 16;
    ge::Model model(ge::model_config(cfg), ge::char_frequency_table(fixture.instances), fixture.categories, glyphs, 3);
    ge::AdamState adam;
    ge::train_epoch(model, adam, fixture.instances, cfg, 1);
    ge::round_to_storage_precision(model.params());
    ge::save_checkpoint((tmp / "model.ckpt").string(), model, cfg);
    auto loaded = ge::load_checkpoint((tmp / "model.ckpt").string());
    bool same_params = loaded.model.params().size() == model.params().size();
    for (std::size_t i = 0; same_params && i < model.params().size(); ++i) {
      same_params = loaded.model.params()[i].value() == model.params()[i].value();
    }
    bool same_predictions = true;
    for (const auto& inst : fixture.instances) {
      same_predictions = same_predictions && loaded.model.predict(inst.title) == model.predict(inst.title);
    }
    out.require(same_params, "checkpoint parameters differ after reload");
    out.require(same_predictions, "checkpoint predictions differ after reload");
  }
  {
    const auto graph = ge::CategoryGraph::load_tsv(kDataDir + "/toy_graph.tsv", ge::default_categories());
    const auto members = ge::load_memberships_tsv(kDataDir + "/toy_memberships.tsv", &graph);
    ge::write_dataset(ge::build_dataset(graph, members, 11), (tmp / "a").string());
    ge::write_dataset(ge::build_dataset(graph, members, 11), (tmp / "b").string());
    bool identical = true;
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(tmp / "a")) {
      ++files;
      identical = identical && slurp(entry.path()) == slurp(tmp / "b" / entry.path().filename());
    }
    out.require(identical && files == 6, "dataset outputs differ across rebuilds");
  }
  fs::remove_all(tmp);
  out.note("losses, checkpoint round trip and dataset bytes reproduced");
  return out;
}

// ---------------------------------------------------------------------------------------
// 10

Outcome dataset_rules() {
  Outcome out;
  out.require(ge::is_special_title("title:agriculture"), "'title:agriculture' not filtered");
  out.require(!ge::is_special_title("economics"), "'economics' filtered");
  const auto kept = ge::filter_titles({"a", "b:c", "d", ":", "e"});
  out.require(kept == std::vector<std::string>{"a", "d", "e"}, "filter does not preserve order");

  const auto s10 = ge::split_sizes(10), s11 = ge::split_sizes(11);
  out.require(s10.train == 6 && s10.valid == 2 && s10.test == 2, "10 does not split 6/2/2");
  out.require(s11.train == 7 && s11.valid == 2 && s11.test == 2, "11 does not split 7/2/2");
  const auto assignment = ge::split_corpus(11, 4);
  out.require(std::count(assignment.begin(), assignment.end(), ge::Split::train) == 7, "split_corpus(11) train != 7");

  const auto graph = ge::CategoryGraph::load_tsv(kDataDir + "/toy_graph.tsv", ge::default_categories());
  const auto members = ge::load_memberships_tsv(kDataDir + "/toy_memberships.tsv", &graph);
  const auto labeled = ge::assign_labels_min_depth(graph, members);
  const auto& cats = ge::default_categories();
  auto label_of = [&](const std::string& title) -> std::string {
    for (const auto& a : labeled) {
      if (a.title == title) return cats[a.label] + "@" + std::to_string(a.depth);
    }
    return "unlabeled";
  };
  // Two steps from Sports (via Ball games), three from Arts (via Performing arts, Dance).
  out.require(label_of("舞球") == "Sports@2", "two-from-Sports example labeled " + label_of("舞球"));
  out.require(label_of("富士山") == "Geography@2", "cyclic branch labeled " + label_of("富士山"));
  out.require(label_of("失物") == "unlabeled", "unreachable article kept");

  const auto build = ge::build_dataset(graph, members, 11);
  const auto sizes = ge::split_sizes(build.instances.size());
  std::size_t train = 0, valid = 0, test = 0;
  for (const auto& i : build.instances) (i.split == ge::Split::train ? train : i.split == ge::Split::valid ? valid : test)++;
  out.require(build.dropped_special == 2, "expected 2 colon titles dropped");
  out.require(train == sizes.train && valid == sizes.valid && test == sizes.test, "toy dataset split sizes wrong");
  out.note("toy corpus " + std::to_string(build.instances.size()) + " titles -> " + std::to_string(train) + "/" +
           std::to_string(valid) + "/" + std::to_string(test));
  return out;
}

struct Criterion {
  int id;
  const char* name;
  double budget_seconds;
  Outcome (*run)();
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria = {
      {1, "shape oracle", 1.0, shape_oracle},
      {2, "gradient suite", 120.0, gradient_suite},
      {3, "oracle equivalence", 0.0, oracle_equivalence},
      {4, "overfit capacity", 600.0, overfit_capacity},
      {5, "rare-character generalization", 900.0, rare_generalization},
      {6, "fusion identities", 0.0, fusion_identities},
      {7, "rarity analytics", 0.0, rarity_analytics},
      {8, "occlusion sanity", 0.0, occlusion_sanity},
      {9, "determinism and persistence", 0.0, determinism_persistence},
      {10, "dataset rules", 0.0, dataset_rules},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget_seconds > 0.0 && secs >= c.budget_seconds) o.require(false, "over the " + fmt(c.budget_seconds) + " s budget");
    failures += o.pass ? 0 : 1;
    std::printf("[%s] criterion %2d  %-30s %8.2fs  %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
