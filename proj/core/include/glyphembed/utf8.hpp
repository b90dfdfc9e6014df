// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

namespace glyphembed::utf8 {

/// Decodes UTF-8 into scalar values; throws DataError on malformed input.
std::u32string decode(std::string_view bytes);

std::string encode(std::u32string_view text);
std::string encode(char32_t cp);

bool is_scalar_value(char32_t cp);

}  // namespace glyphembed::utf8
