#pragma once

#include <string>
#include <string_view>

namespace spantag {

// All character offsets in this project count Unicode scalar values, not
// bytes. These helpers convert between UTF-8 byte strings and codepoint
// sequences; decoding is strict (overlong forms, surrogates and truncated
// sequences are rejected).

/// Decodes UTF-8 bytes to codepoints; throws DataError on invalid input.
std::u32string decode_utf8(std::string_view bytes);

std::string encode_utf8(std::u32string_view chars);

/// Number of Unicode scalar values in a UTF-8 string.
std::size_t utf8_length(std::string_view bytes);

/// Substring by codepoint offsets [begin, end); throws std::out_of_range
/// when the interval does not fit the text.
std::string utf8_slice(std::string_view bytes, std::size_t begin, std::size_t end);

}  // namespace spantag
