// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "glyphembed/glyph.hpp"
#include "glyphembed/model.hpp"

namespace glyphembed {

enum class FusionKind { none, late, fallback };

std::string_view to_string(FusionKind kind);
FusionKind parse_fusion_kind(std::string_view name);

/// Run settings read from a JSON object. Unknown keys are rejected.
struct RunConfig {
  TrainConfig train;
  /// Directory holding train.tsv, valid.tsv and test.tsv.
  std::string corpus_dir;
  std::string out_dir = "out";
  /// Empty means procedural glyphs from `fixture_set`.
  std::string font;
  int pixel_size = 36;
  std::string fixture_set = "radicals";
  FusionKind fusion = FusionKind::none;
  double threshold = 0.0;
  std::vector<std::string> categories;
  /// Checkpoints whose matching parameters seed the model before training.
  std::vector<std::string> warm_start;

  GlyphSourceConfig glyph_source() const;
  void validate() const;
};

/// Throws ConfigError on syntax errors, unknown keys, wrong types or invalid values.
RunConfig parse_run_config(std::string_view json_text);
RunConfig load_run_config(const std::string& path);
std::string dump_run_config(const RunConfig& config);

}  // namespace glyphembed
