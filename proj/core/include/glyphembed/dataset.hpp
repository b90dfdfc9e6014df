// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "glyphembed/corpus.hpp"

namespace glyphembed {

struct DatasetBuild {
  std::vector<std::string> categories;
  /// Kept articles in membership order, each with its label and split.
  std::vector<Instance> instances;
  std::size_t dropped_special = 0;
  std::size_t dropped_unreachable = 0;
  FrequencyTable train_frequencies;
};

/// Filters `.*:.*` titles, labels by minimum depth, then splits 6:2:2 under `seed`.
DatasetBuild build_dataset(const CategoryGraph& graph, const Memberships& memberships, std::uint64_t seed);

/// Writes train.tsv, valid.tsv, test.tsv, splits.tsv (title hash, split), freq.tsv and
/// summary.json into `dir`, creating it if needed. Output depends only on `build`.
void write_dataset(const DatasetBuild& build, const std::string& dir);

}  // namespace glyphembed
