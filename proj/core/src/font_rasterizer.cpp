// SPDX-License-Identifier: Apache-2.0
#include "font_rasterizer.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>

#include "glyphembed/error.hpp"

#if defined(__GNUC__)
#pragma GCC diagnostic push
#pragma GCC diagnostic ignored "-Wunused-function"
#pragma GCC diagnostic ignored "-Wmissing-field-initializers"
#pragma GCC diagnostic ignored "-Wunused-parameter"
#pragma GCC diagnostic ignored "-Wsign-compare"
#pragma GCC diagnostic ignored "-Wpedantic"
#endif
#define STB_TRUETYPE_IMPLEMENTATION
#define STBTT_STATIC
#include "imstb_truetype.h"
#if defined(__GNUC__)
#pragma GCC diagnostic pop
#endif

namespace glyphembed::detail {

struct FontRasterizer::Impl {
  std::vector<unsigned char> data;
  stbtt_fontinfo info{};
  float em_scale = 0.0f;
};

FontRasterizer::FontRasterizer(const std::string& path, int pixel_size) : impl_(std::make_unique<Impl>()) {
  if (pixel_size <= 0) throw ConfigError("font pixel size must be positive");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open font file: " + path);
  impl_->data.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  if (impl_->data.empty()) throw DataError("empty font file: " + path);
  const int offset = stbtt_GetFontOffsetForIndex(impl_->data.data(), 0);
  if (offset < 0 || !stbtt_InitFont(&impl_->info, impl_->data.data(), offset)) {
    throw DataError("not a TrueType font: " + path);
  }
  impl_->em_scale = stbtt_ScaleForMappingEmToPixels(&impl_->info, static_cast<float>(pixel_size));
}

FontRasterizer::~FontRasterizer() = default;

std::optional<GlyphImage> FontRasterizer::rasterize(char32_t codepoint) {
  const int glyph = stbtt_FindGlyphIndex(&impl_->info, static_cast<int>(codepoint));
  if (glyph == 0) return std::nullopt;

  constexpr int kBox = static_cast<int>(kGlyphSize);
  float scale = impl_->em_scale;
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  stbtt_GetGlyphBitmapBox(&impl_->info, glyph, scale, scale, &x0, &y0, &x1, &y1);
  // Shrink until the glyph box fits; integer box rounding can need a second pass.
  for (int attempt = 0; attempt < 8 && (x1 - x0 > kBox || y1 - y0 > kBox); ++attempt) {
    const float fit = std::min(static_cast<float>(kBox) / static_cast<float>(x1 - x0),
                               static_cast<float>(kBox) / static_cast<float>(y1 - y0));
    scale *= fit * 0.999f;
    stbtt_GetGlyphBitmapBox(&impl_->info, glyph, scale, scale, &x0, &y0, &x1, &y1);
  }
  const int width = std::min(x1 - x0, kBox);
  const int height = std::min(y1 - y0, kBox);

  GlyphImage image;
  if (width <= 0 || height <= 0) return image;

  std::vector<unsigned char> bitmap(static_cast<std::size_t>(width * height), 0);
  stbtt_MakeGlyphBitmap(&impl_->info, bitmap.data(), width, height, width, scale, scale, glyph);

  const int off_x = (kBox - width) / 2;
  const int off_y = (kBox - height) / 2;
  const unsigned char peak = *std::max_element(bitmap.begin(), bitmap.end());
  if (peak == 0) return image;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const auto v = bitmap[static_cast<std::size_t>(y * width + x)];
      image(static_cast<std::size_t>(y + off_y), static_cast<std::size_t>(x + off_x)) =
          static_cast<double>(v) / static_cast<double>(peak);
    }
  }
  return image;
}

}  // namespace glyphembed::detail
