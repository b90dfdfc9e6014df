// SPDX-License-Identifier: Apache-2.0
#include <benchmark/benchmark.h>

#include <memory>

#include "glyphembed/embedders.hpp"
#include "glyphembed/graph.hpp"
#include "glyphembed/model.hpp"
#include "glyphembed/procedural.hpp"
#include "glyphembed/rng.hpp"
#include "glyphembed/synthetic.hpp"

namespace ge = glyphembed;

namespace {

ge::Tensor random_tensor(ge::Shape shape, std::uint64_t seed) {
  ge::Tensor t(shape);
  ge::CounterRng rng(seed);
  for (double& v : t.values()) v = rng.uniform(-1.0, 1.0);
  return t;
}

void BM_Conv2dForward(benchmark::State& state) {
  const auto channels = static_cast<std::size_t>(state.range(0));
  const auto extent = static_cast<std::size_t>(state.range(1));
  const ge::Tensor input = random_tensor({channels, extent, extent}, 1);
  const ge::Tensor kernels = random_tensor({32, channels, 3, 3}, 2);
  const ge::Tensor bias = random_tensor({32}, 3);
  for (auto _ : state) {
    ge::Graph g;
    const auto out = g.conv2d(g.constant(input), g.constant(kernels), g.constant(bias));
    benchmark::DoNotOptimize(g.value(out).data());
  }
}
BENCHMARK(BM_Conv2dForward)->Args({1, 36})->Args({32, 17})->Args({32, 7});

void BM_VisualEmbed(benchmark::State& state) {
  ge::ParameterStore store;
  const auto params = ge::add_visual_params(store, 128, 1);
  const auto image = ge::procedural::composite_glyph(3, 5);
  const bool with_backward = state.range(0) != 0;
  for (auto _ : state) {
    ge::Graph g;
    const auto e = ge::visual_embed(g, params, image);
    if (with_backward) {
      g.backward(g.sum(e));
      store.zero_grad();
    }
    benchmark::DoNotOptimize(g.value(e).data());
  }
}
BENCHMARK(BM_VisualEmbed)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_GruEncode(benchmark::State& state) {
  ge::ParameterStore store;
  const auto gru = ge::add_gru_params(store, 128, 128, 1);
  const ge::Tensor x = random_tensor({128}, 9);
  for (auto _ : state) {
    ge::Graph g;
    std::vector<ge::Var> embeds(10, g.constant(x));
    const auto h = ge::encode_sequence(g, gru, embeds);
    benchmark::DoNotOptimize(g.value(h).data());
  }
}
BENCHMARK(BM_GruEncode)->Unit(benchmark::kMicrosecond);

void BM_TrainEpochOverfit(benchmark::State& state) {
  const auto kind = state.range(0) == 0 ? ge::ModelKind::lookup : ge::ModelKind::visual;
  const auto fixture = ge::synthetic::overfit_fixture();
  auto glyphs = std::make_shared<const ge::GlyphProvider>(ge::ProceduralSource{});
  ge::TrainConfig cfg;
  cfg.kind = kind;
  cfg.batch_size = 16;
  ge::Model model(ge::model_config(cfg), ge::char_frequency_table(fixture.instances), fixture.categories, glyphs, 1);
  ge::AdamState adam;
  std::size_t epoch = 0;
  for (auto _ : state) {
    auto report = ge::train_epoch(model, adam, fixture.instances, cfg, ++epoch);
    benchmark::DoNotOptimize(report.mean_loss);
  }
}
BENCHMARK(BM_TrainEpochOverfit)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
