// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string_view>
#include <utility>

#include "glyphembed/glyph.hpp"

// Font-free glyph fixtures. Composite characters are built from 18x18 "radical" bitmaps
// placed into quadrant slots, so characters sharing a radical share visual structure.
namespace glyphembed::procedural {

inline constexpr std::size_t kRadicalSize = kGlyphHalf;
inline constexpr std::size_t kSemanticRadicals = 12;
inline constexpr std::size_t kComponentRadicals = 32;

/// Composite (s, c) lives at kCompositeBase + s * kComponentRadicals + c.
inline constexpr char32_t kCompositeBase = 0xE000;
inline constexpr char32_t kFullBlock = 0x2588;

using Radical = std::array<double, kRadicalSize * kRadicalSize>;

enum class Slot { top_left, top_right, bottom_left, bottom_right };

/// Radicals that carry a label in synthetic corpora.
const Radical& semantic_radical(std::size_t index);
/// Filler radicals paired with semantic ones.
const Radical& component_radical(std::size_t index);

void place(GlyphImage& image, const Radical& radical, Slot slot);

char32_t composite_codepoint(std::size_t semantic, std::size_t component);
/// (semantic, component) for codepoints in the composite block.
std::optional<std::pair<std::size_t, std::size_t>> decode_composite(char32_t codepoint);

/// Semantic radical in the top-left quadrant, component radical in the bottom-right.
GlyphImage composite_glyph(std::size_t semantic, std::size_t component);

bool is_fixture_set(std::string_view id);

/// Image for a codepoint in fixture set `id`; throws ConfigError for an unknown set.
/// The "radicals" set maps whitespace to blank, U+2588 to a saturated grid, the composite
/// block to composite glyphs, and any other codepoint to a hashed pair of component radicals.
GlyphImage fixture_glyph(std::string_view id, char32_t codepoint);

}  // namespace glyphembed::procedural
