// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include "glyphembed/glyph.hpp"
#include "glyphembed/model.hpp"

namespace glyphembed {

inline constexpr int kCheckpointVersion = 1;

// Checkpoint layout:
//   GLYPHEMBED-CHECKPOINT <version>\n
//   <header byte count>\n
//   <JSON header>            model kind, widths, categories, vocabulary with training counts,
//                            glyph source, training config, and a tensor table (name, shape, offset)
//   <tensor blobs>           little-endian IEEE-754 binary32, row-major, in table order

/// Saves parameters at 32-bit precision. `train_config` is recorded for provenance.
void save_checkpoint(std::ostream& out, const Model& model, const std::optional<TrainConfig>& train_config = {});
void save_checkpoint(const std::string& path, const Model& model,
                     const std::optional<TrainConfig>& train_config = {});

struct LoadedCheckpoint {
  Model model;
  std::optional<TrainConfig> train_config;
};

/// Rebuilds the model. When `glyphs` is null and the model needs one, the provider is
/// recreated from the recorded glyph source. Throws DataError for malformed files.
LoadedCheckpoint load_checkpoint(std::istream& in, std::shared_ptr<const GlyphProvider> glyphs = nullptr);
LoadedCheckpoint load_checkpoint(const std::string& path, std::shared_ptr<const GlyphProvider> glyphs = nullptr);

/// Rounds every parameter value to the nearest binary32, the precision checkpoints store.
void round_to_storage_precision(ParameterStore& params);

}  // namespace glyphembed
