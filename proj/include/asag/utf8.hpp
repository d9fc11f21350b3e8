#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace asag::utf8 {

// Decodes UTF-8 into codepoints; invalid byte sequences yield U+FFFD one byte at a time.
std::vector<char32_t> decode(std::string_view text);

// Encodes a codepoint sequence back to UTF-8.
std::string encode(const std::vector<char32_t>& codepoints);

// Number of Unicode scalar values in the string.
std::size_t count_codepoints(std::string_view text);

// ASCII-only lowercasing; other codepoints pass through unchanged.
std::string ascii_lower(std::string_view text);

bool is_ascii_space(char32_t cp);
bool is_word_char(char32_t cp);  // ASCII alphanumerics and all non-ASCII codepoints

}  // namespace asag::utf8
