// SPDX-License-Identifier: Apache-2.0
#include "glyphembed/procedural.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "glyphembed/error.hpp"
#include "glyphembed/rng.hpp"

namespace glyphembed::procedural {
namespace {

constexpr int kSide = static_cast<int>(kRadicalSize);
constexpr std::size_t kMinHamming = 24;

void stamp(Radical& r, int row, int col) {
  for (int dr = 0; dr < 2; ++dr) {
    for (int dc = 0; dc < 2; ++dc) {
      const int y = row + dr;
      const int x = col + dc;
      if (y >= 0 && y < kSide && x >= 0 && x < kSide) r[static_cast<std::size_t>(y * kSide + x)] = 1.0;
    }
  }
}

void stroke(Radical& r, int r0, int c0, int r1, int c1) {
  const int steps = std::max(std::abs(r1 - r0), std::abs(c1 - c0));
  for (int i = 0; i <= steps; ++i) {
    const double t = steps == 0 ? 0.0 : static_cast<double>(i) / steps;
    const int row = r0 + static_cast<int>(std::lround(t * (r1 - r0)));
    const int col = c0 + static_cast<int>(std::lround(t * (c1 - c0)));
    stamp(r, row, col);
  }
}

Radical random_radical(CounterRng& rng) {
  Radical r{};
  const int strokes = 3 + static_cast<int>(rng.below(2));
  auto coord = [&](int lo, int hi) { return lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1))); };
  for (int s = 0; s < strokes; ++s) {
    switch (rng.below(5)) {
      case 0: {  // horizontal
        const int row = coord(1, 15);
        stroke(r, row, coord(1, 5), row, coord(10, 15));
        break;
      }
      case 1: {  // vertical
        const int col = coord(1, 15);
        stroke(r, coord(1, 5), col, coord(10, 15), col);
        break;
      }
      case 2:  // falling diagonal
        stroke(r, coord(1, 6), coord(1, 6), coord(10, 15), coord(10, 15));
        break;
      case 3:  // rising diagonal
        stroke(r, coord(10, 15), coord(1, 6), coord(1, 6), coord(10, 15));
        break;
      default: {  // small box
        const int top = coord(1, 8);
        const int left = coord(1, 8);
        const int size = coord(4, 7);
        stroke(r, top, left, top, left + size);
        stroke(r, top + size, left, top + size, left + size);
        stroke(r, top, left, top + size, left);
        stroke(r, top, left + size, top + size, left + size);
        break;
      }
    }
  }
  return r;
}

std::size_t hamming(const Radical& a, const Radical& b) {
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] != b[i]) ? 1 : 0;
  return d;
}

// Both banks are drawn from one generator so every radical is distinct from every other.
struct Banks {
  std::vector<Radical> semantic;
  std::vector<Radical> component;

  Banks() {
    CounterRng rng = CounterRng(0x5eed).split(17);
    std::vector<const Radical*> accepted;
    auto draw = [&](std::vector<Radical>& bank, std::size_t count) {
      bank.reserve(count);
      while (bank.size() < count) {
        Radical candidate = random_radical(rng);
        const bool distinct = std::all_of(accepted.begin(), accepted.end(),
                                          [&](const Radical* other) { return hamming(*other, candidate) >= kMinHamming; });
        if (!distinct) continue;
        bank.push_back(candidate);
        accepted.push_back(&bank.back());
      }
    };
    draw(semantic, kSemanticRadicals);
    draw(component, kComponentRadicals);
  }
};

const Banks& banks() {
  static const Banks instance;
  return instance;
}

bool is_space(char32_t cp) {
  return cp == 0x20 || cp == 0x09 || cp == 0x0A || cp == 0x0D || cp == 0xA0 || cp == 0x3000 ||
         (cp >= 0x2000 && cp <= 0x200A);
}

}  // namespace

const Radical& semantic_radical(std::size_t index) {
  GLYPHEMBED_EXPECT(index < kSemanticRadicals, "semantic radical index out of range");
  return banks().semantic[index];
}

const Radical& component_radical(std::size_t index) {
  GLYPHEMBED_EXPECT(index < kComponentRadicals, "component radical index out of range");
  return banks().component[index];
}

void place(GlyphImage& image, const Radical& radical, Slot slot) {
  const std::size_t row0 = (slot == Slot::bottom_left || slot == Slot::bottom_right) ? kRadicalSize : 0;
  const std::size_t col0 = (slot == Slot::top_right || slot == Slot::bottom_right) ? kRadicalSize : 0;
  for (std::size_t y = 0; y < kRadicalSize; ++y) {
    for (std::size_t x = 0; x < kRadicalSize; ++x) {
      image(row0 + y, col0 + x) = std::max(image(row0 + y, col0 + x), radical[y * kRadicalSize + x]);
    }
  }
}

char32_t composite_codepoint(std::size_t semantic, std::size_t component) {
  GLYPHEMBED_EXPECT(semantic < kSemanticRadicals && component < kComponentRadicals, "composite index out of range");
  return kCompositeBase + static_cast<char32_t>(semantic * kComponentRadicals + component);
}

std::optional<std::pair<std::size_t, std::size_t>> decode_composite(char32_t codepoint) {
  if (codepoint < kCompositeBase) return std::nullopt;
  const std::size_t offset = codepoint - kCompositeBase;
  if (offset >= kSemanticRadicals * kComponentRadicals) return std::nullopt;
  return std::pair{offset / kComponentRadicals, offset % kComponentRadicals};
}

GlyphImage composite_glyph(std::size_t semantic, std::size_t component) {
  GlyphImage image;
  place(image, semantic_radical(semantic), Slot::top_left);
  place(image, component_radical(component), Slot::bottom_right);
  return image;
}

bool is_fixture_set(std::string_view id) { return id == "radicals"; }

GlyphImage fixture_glyph(std::string_view id, char32_t codepoint) {
  if (!is_fixture_set(id)) throw ConfigError("unknown glyph fixture set: " + std::string(id));
  if (is_space(codepoint)) return GlyphImage{};
  if (codepoint == kFullBlock) return GlyphImage::filled(1.0);
  if (auto parts = decode_composite(codepoint)) return composite_glyph(parts->first, parts->second);

  const std::uint64_t h = CounterRng::mix(static_cast<std::uint64_t>(codepoint) * 0x100000001b3ULL);
  GlyphImage image;
  place(image, component_radical(h % kComponentRadicals), Slot::top_right);
  place(image, component_radical((h >> 16) % kComponentRadicals), Slot::bottom_left);
  return image;
}

}  // namespace glyphembed::procedural
