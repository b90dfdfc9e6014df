// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace glyphembed {

inline constexpr std::size_t kGlyphSize = 36;
inline constexpr std::size_t kGlyphHalf = kGlyphSize / 2;
inline constexpr std::size_t kGlyphPixels = kGlyphSize * kGlyphSize;

/// 36x36 intensity grid, row-major. Ink is 1, background is 0.
class GlyphImage {
 public:
  GlyphImage() { pixels_.fill(0.0); }

  static GlyphImage filled(double value);

  double operator()(std::size_t row, std::size_t col) const { return pixels_[row * kGlyphSize + col]; }
  double& operator()(std::size_t row, std::size_t col) { return pixels_[row * kGlyphSize + col]; }

  std::span<const double, kGlyphPixels> pixels() const { return pixels_; }
  std::span<double, kGlyphPixels> pixels() { return pixels_; }

  double ink_sum() const;
  /// Mean intensity over the grid, in [0, 1].
  double ink_coverage() const { return ink_sum() / static_cast<double>(kGlyphPixels); }
  bool blank() const;

  friend bool operator==(const GlyphImage&, const GlyphImage&) = default;

 private:
  std::array<double, kGlyphPixels> pixels_;
};

enum class Half { upper, lower, left, right };

std::string_view to_string(Half half);

/// Keeps one half of the grid (split at row/column 18) and blanks the rest to background.
GlyphImage mask_half(const GlyphImage& image, Half keep);

// PGM I/O. Written as binary P5, maxval 255, value = round(255 * pixel). Reading accepts P2 and P5.
void write_pgm(std::ostream& out, const GlyphImage& image);
void write_pgm(const std::string& path, const GlyphImage& image);
GlyphImage read_pgm(std::istream& in);
GlyphImage read_pgm(const std::string& path);

struct FontSource {
  std::string path;
  int pixel_size = 36;
};

struct ProceduralSource {
  std::string fixture_set = "radicals";
};

using GlyphSourceConfig = std::variant<FontSource, ProceduralSource>;

namespace detail {
class FontRasterizer;
}

/// Resolves codepoints to glyph images. Rendering is deterministic and cached; the provider
/// may be shared across threads after construction.
class GlyphProvider {
 public:
  /// Throws DataError when the font cannot be loaded, ConfigError for an unknown fixture set.
  explicit GlyphProvider(GlyphSourceConfig config, GlyphImage fallback = GlyphImage{});
  ~GlyphProvider();

  GlyphProvider(const GlyphProvider&) = delete;
  GlyphProvider& operator=(const GlyphProvider&) = delete;

  GlyphImage render(char32_t codepoint) const;
  std::vector<GlyphImage> render_title(std::u32string_view codepoints) const;

  const GlyphSourceConfig& config() const { return config_; }
  const GlyphImage& fallback() const { return fallback_; }

 private:
  GlyphImage render_uncached(char32_t codepoint) const;

  GlyphSourceConfig config_;
  GlyphImage fallback_;
  std::unique_ptr<detail::FontRasterizer> font_;
  mutable std::mutex cache_mutex_;
  mutable std::unordered_map<char32_t, GlyphImage> cache_;
};

}  // namespace glyphembed
