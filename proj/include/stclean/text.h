#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace stclean {

// Canonical form shared by alignment, decoding and the edit-distance rule:
// uppercase ASCII letters; typographic apostrophes (U+2018, U+2019, U+02BC,
// U+00B4, U+0060) become "'"; any other character outside [A-Z ' space] is
// deleted; whitespace runs collapse to one space; leading/trailing spaces
// are trimmed.
std::string normalize_text(std::string_view text);

// Decodes UTF-8 to code points. Invalid bytes decode to U+FFFD one byte at a
// time so the function never fails.
std::u32string utf8_decode(std::string_view text);

std::size_t utf8_length(std::string_view text);

std::string_view trim(std::string_view text);

// Splits on runs of ASCII whitespace.
std::vector<std::string> split_whitespace(std::string_view text);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace stclean
