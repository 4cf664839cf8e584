#include "spantag/unicode.hpp"

#include <stdexcept>

#include "spantag/errors.hpp"

namespace spantag {

namespace {

[[noreturn]] void bad_utf8(std::size_t byte_offset) {
  throw DataError("invalid UTF-8 at byte offset " + std::to_string(byte_offset));
}

}  // namespace

std::u32string decode_utf8(std::string_view bytes) {
  std::u32string out;
  out.reserve(bytes.size());
  std::size_t i = 0;
  const std::size_t n = bytes.size();
  while (i < n) {
    const unsigned char b0 = static_cast<unsigned char>(bytes[i]);
    char32_t cp = 0;
    std::size_t len = 0;
    if (b0 < 0x80) {
      cp = b0;
      len = 1;
    } else if ((b0 & 0xE0) == 0xC0) {
      cp = b0 & 0x1F;
      len = 2;
    } else if ((b0 & 0xF0) == 0xE0) {
      cp = b0 & 0x0F;
      len = 3;
    } else if ((b0 & 0xF8) == 0xF0) {
      cp = b0 & 0x07;
      len = 4;
    } else {
      bad_utf8(i);
    }
    if (i + len > n) bad_utf8(i);
    for (std::size_t k = 1; k < len; ++k) {
      const unsigned char bk = static_cast<unsigned char>(bytes[i + k]);
      if ((bk & 0xC0) != 0x80) bad_utf8(i);
      cp = (cp << 6) | (bk & 0x3F);
    }
    // Reject overlong encodings, surrogates and out-of-range values.
    if (len == 2 && cp < 0x80) bad_utf8(i);
    if (len == 3 && cp < 0x800) bad_utf8(i);
    if (len == 4 && cp < 0x10000) bad_utf8(i);
    if (cp >= 0xD800 && cp <= 0xDFFF) bad_utf8(i);
    if (cp > 0x10FFFF) bad_utf8(i);
    out.push_back(cp);
    i += len;
  }
  return out;
}

std::string encode_utf8(std::u32string_view chars) {
  std::string out;
  out.reserve(chars.size());
  for (char32_t cp : chars) {
    if (cp >= 0xD800 && cp <= 0xDFFF)
      throw std::invalid_argument("cannot encode surrogate codepoint");
    if (cp > 0x10FFFF) throw std::invalid_argument("codepoint out of range");
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return out;
}

std::size_t utf8_length(std::string_view bytes) { return decode_utf8(bytes).size(); }

std::string utf8_slice(std::string_view bytes, std::size_t begin, std::size_t end) {
  const std::u32string chars = decode_utf8(bytes);
  if (begin > end || end > chars.size())
    throw std::out_of_range("utf8_slice: [" + std::to_string(begin) + ", " + std::to_string(end) +
                            ") outside text of length " + std::to_string(chars.size()));
  return encode_utf8(std::u32string_view(chars).substr(begin, end - begin));
}

}  // namespace spantag
