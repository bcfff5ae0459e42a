#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace tqa::utf8 {

inline constexpr char32_t kReplacement = 0xFFFD;

/// Decodes the code point starting at `pos` and advances `pos` past it.
/// Invalid sequences decode to U+FFFD and consume one byte.
char32_t next(std::string_view s, std::size_t& pos);

void append(std::string& out, char32_t cp);

std::vector<char32_t> decode(std::string_view s);
std::string encode(const std::vector<char32_t>& cps);

std::size_t length(std::string_view s);

// ASCII whitespace, NBSP, ideographic space and the U+2000 block spaces.
bool is_space(char32_t cp);

// Maps full-width ASCII variants (U+FF01..U+FF5E) and U+3000 to ASCII.
char32_t fold_width(char32_t cp);

/// Removes is_space() code points from both ends.
std::string trim(std::string_view s);

/// Trims both ends and collapses every internal run of is_space() code
/// points into one ASCII space.
std::string collapse_whitespace(std::string_view s);

}  // namespace tqa::utf8
