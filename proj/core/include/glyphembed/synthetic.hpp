// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "glyphembed/corpus.hpp"

// Labeled corpora over the procedural "radicals" glyph set.
namespace glyphembed::synthetic {

struct RadicalCorpusOptions {
  std::size_t train_titles = 960;
  std::size_t valid_titles = 120;
  /// Test titles per (class, title length) cell, so every title length has balanced labels.
  std::size_t test_titles_per_cell = 5;
  std::size_t min_length = 2;
  std::size_t max_length = 3;
  /// Composite (s, c) is reserved for the test split when (s + c) % modulus == 0.
  std::size_t holdout_modulus = 4;
  std::uint64_t seed = 7;
};

struct LabeledCorpus {
  std::vector<std::string> categories;
  std::vector<Instance> instances;
};

bool is_held_out(std::size_t semantic, std::size_t component, std::size_t modulus);

/// Every title is built from composites sharing one semantic radical, which is its label.
/// Train and valid titles use only non-held-out composites; test titles use only held-out
/// ones, so no test character appears in training.
LabeledCorpus radical_corpus(const RadicalCorpusOptions& options);

/// 64 train-split titles of 1 to 4 composites labeled by the first character's semantic
/// radical. Small enough to memorize.
LabeledCorpus overfit_fixture(std::uint64_t seed = 64);

}  // namespace glyphembed::synthetic
