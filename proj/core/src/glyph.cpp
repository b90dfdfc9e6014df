// SPDX-License-Identifier: Apache-2.0
#include "glyphembed/glyph.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>

#include "font_rasterizer.hpp"
#include "glyphembed/error.hpp"
#include "glyphembed/procedural.hpp"
#include "glyphembed/utf8.hpp"

namespace glyphembed {

GlyphImage GlyphImage::filled(double value) {
  GlyphImage image;
  std::fill(image.pixels_.begin(), image.pixels_.end(), value);
  return image;
}

double GlyphImage::ink_sum() const { return std::accumulate(pixels_.begin(), pixels_.end(), 0.0); }

bool GlyphImage::blank() const {
  return std::all_of(pixels_.begin(), pixels_.end(), [](double v) { return v == 0.0; });
}

std::string_view to_string(Half half) {
  switch (half) {
    case Half::upper: return "upper";
    case Half::lower: return "lower";
    case Half::left: return "left";
    case Half::right: return "right";
  }
  return "?";
}

GlyphImage mask_half(const GlyphImage& image, Half keep) {
  GlyphImage out;
  for (std::size_t row = 0; row < kGlyphSize; ++row) {
    for (std::size_t col = 0; col < kGlyphSize; ++col) {
      bool kept = false;
      switch (keep) {
        case Half::upper: kept = row < kGlyphHalf; break;
        case Half::lower: kept = row >= kGlyphHalf; break;
        case Half::left: kept = col < kGlyphHalf; break;
        case Half::right: kept = col >= kGlyphHalf; break;
      }
      if (kept) out(row, col) = image(row, col);
    }
  }
  return out;
}

void write_pgm(std::ostream& out, const GlyphImage& image) {
  out << "P5\n" << kGlyphSize << ' ' << kGlyphSize << "\n255\n";
  for (double v : image.pixels()) {
    const long q = std::lround(255.0 * std::clamp(v, 0.0, 1.0));
    out.put(static_cast<char>(static_cast<unsigned char>(q)));
  }
}

void write_pgm(const std::string& path, const GlyphImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write PGM: " + path);
  write_pgm(out, image);
}

namespace {

// Next whitespace-separated header token, skipping '#' comments.
std::string pgm_token(std::istream& in) {
  std::string token;
  char c = 0;
  while (in.get(c)) {
    if (c == '#') {
      std::string ignored;
      std::getline(in, ignored);
      if (!token.empty()) break;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(c);
  }
  return token;
}

}  // namespace

GlyphImage read_pgm(std::istream& in) {
  const std::string magic = pgm_token(in);
  if (magic != "P2" && magic != "P5") throw DataError("not a PGM file (magic '" + magic + "')");
  int width = 0, height = 0, maxval = 0;
  try {
    width = std::stoi(pgm_token(in));
    height = std::stoi(pgm_token(in));
    maxval = std::stoi(pgm_token(in));
  } catch (const std::exception&) {
    throw DataError("malformed PGM header");
  }
  if (width != static_cast<int>(kGlyphSize) || height != static_cast<int>(kGlyphSize)) {
    throw DataError("glyph PGM must be 36x36");
  }
  if (maxval <= 0 || maxval > 255) throw DataError("unsupported PGM maxval");

  GlyphImage image;
  auto px = image.pixels();
  for (std::size_t i = 0; i < kGlyphPixels; ++i) {
    int v = 0;
    if (magic == "P5") {
      char c = 0;
      if (!in.get(c)) throw DataError("truncated PGM raster");
      v = static_cast<unsigned char>(c);
    } else {
      const std::string token = pgm_token(in);
      if (token.empty()) throw DataError("truncated PGM raster");
      v = std::stoi(token);
    }
    px[i] = static_cast<double>(v) / static_cast<double>(maxval);
  }
  return image;
}

GlyphImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open PGM: " + path);
  return read_pgm(in);
}

GlyphProvider::GlyphProvider(GlyphSourceConfig config, GlyphImage fallback)
    : config_(std::move(config)), fallback_(fallback) {
  if (const auto* font = std::get_if<FontSource>(&config_)) {
    font_ = std::make_unique<detail::FontRasterizer>(font->path, font->pixel_size);
  } else {
    const auto& fixtures = std::get<ProceduralSource>(config_);
    if (!procedural::is_fixture_set(fixtures.fixture_set)) {
      throw ConfigError("unknown glyph fixture set: " + fixtures.fixture_set);
    }
  }
}

GlyphProvider::~GlyphProvider() = default;

GlyphImage GlyphProvider::render_uncached(char32_t codepoint) const {
  if (!utf8::is_scalar_value(codepoint)) return fallback_;
  if (font_) {
    auto image = font_->rasterize(codepoint);
    return image ? *image : fallback_;
  }
  return procedural::fixture_glyph(std::get<ProceduralSource>(config_).fixture_set, codepoint);
}

GlyphImage GlyphProvider::render(char32_t codepoint) const {
  std::lock_guard lock(cache_mutex_);
  if (auto it = cache_.find(codepoint); it != cache_.end()) return it->second;
  GlyphImage image = render_uncached(codepoint);
  cache_.emplace(codepoint, image);
  return image;
}

std::vector<GlyphImage> GlyphProvider::render_title(std::u32string_view codepoints) const {
  std::vector<GlyphImage> out;
  out.reserve(codepoints.size());
  for (char32_t cp : codepoints) out.push_back(render(cp));
  return out;
}

}  // namespace glyphembed
