// SPDX-License-Identifier: Apache-2.0
#include "glyphembed/synthetic.hpp"

#include "glyphembed/error.hpp"
#include "glyphembed/procedural.hpp"
#include "glyphembed/rng.hpp"

namespace glyphembed::synthetic {
namespace {

using procedural::composite_codepoint;
using procedural::kComponentRadicals;
using procedural::kSemanticRadicals;

std::vector<std::size_t> components_for(std::size_t semantic, std::size_t modulus, bool held_out) {
  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < kComponentRadicals; ++c) {
    if (is_held_out(semantic, c, modulus) == held_out) out.push_back(c);
  }
  return out;
}

std::u32string random_title(CounterRng& rng, std::size_t semantic, std::size_t length,
                            const std::vector<std::size_t>& components) {
  std::u32string title;
  for (std::size_t i = 0; i < length; ++i) {
    title.push_back(composite_codepoint(semantic, components[rng.below(components.size())]));
  }
  return title;
}

}  // namespace

bool is_held_out(std::size_t semantic, std::size_t component, std::size_t modulus) {
  return modulus != 0 && (semantic + component) % modulus == 0;
}

LabeledCorpus radical_corpus(const RadicalCorpusOptions& o) {
  if (o.min_length == 0 || o.min_length > o.max_length) throw ConfigError("invalid title length range");
  if (o.holdout_modulus < 2) throw ConfigError("holdout modulus must be at least 2");

  LabeledCorpus corpus;
  corpus.categories = default_categories();
  CounterRng rng = CounterRng(o.seed).split(0x7261646963616cULL);
  const std::size_t span = o.max_length - o.min_length + 1;

  auto emit = [&](Split split, std::size_t semantic, std::size_t length, bool held_out) {
    const auto comps = components_for(semantic, o.holdout_modulus, held_out);
    corpus.instances.push_back({random_title(rng, semantic, length, comps), semantic, split});
  };
  for (std::size_t i = 0; i < o.train_titles; ++i) {
    emit(Split::train, rng.below(kSemanticRadicals), o.min_length + rng.below(span), false);
  }
  for (std::size_t i = 0; i < o.valid_titles; ++i) {
    emit(Split::valid, rng.below(kSemanticRadicals), o.min_length + rng.below(span), false);
  }
  for (std::size_t len = o.min_length; len <= o.max_length; ++len) {
    for (std::size_t s = 0; s < kSemanticRadicals; ++s) {
      for (std::size_t k = 0; k < o.test_titles_per_cell; ++k) emit(Split::test, s, len, true);
    }
  }
  return corpus;
}

LabeledCorpus overfit_fixture(std::uint64_t seed) {
  LabeledCorpus corpus;
  corpus.categories = default_categories();
  CounterRng rng = CounterRng(seed).split(0x6f76657266697454ULL);
  for (std::size_t i = 0; i < 64; ++i) {
    const std::size_t length = 1 + rng.below(4);
    std::u32string title;
    std::size_t label = 0;
    for (std::size_t k = 0; k < length; ++k) {
      const std::size_t s = rng.below(kSemanticRadicals);
      const std::size_t c = rng.below(kComponentRadicals);
      if (k == 0) label = s;
      title.push_back(composite_codepoint(s, c));
    }
    corpus.instances.push_back({std::move(title), label, Split::train});
  }
  return corpus;
}

}  // namespace glyphembed::synthetic
