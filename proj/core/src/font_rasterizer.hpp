// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "glyphembed/glyph.hpp"

namespace glyphembed::detail {

/// TrueType rasterizer backed by stb_truetype. Not thread-safe; GlyphProvider serializes access.
class FontRasterizer {
 public:
  FontRasterizer(const std::string& path, int pixel_size);
  ~FontRasterizer();

  FontRasterizer(const FontRasterizer&) = delete;
  FontRasterizer& operator=(const FontRasterizer&) = delete;

  /// nullopt when the font has no glyph for the codepoint.
  std::optional<GlyphImage> rasterize(char32_t codepoint);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace glyphembed::detail
