#include "spantag/tokenizer.hpp"

#include <algorithm>

#include "spantag/unicode.hpp"

namespace spantag {

bool is_word_whitespace(char32_t cp) {
  switch (cp) {
    case U' ':
    case U'\t':
    case U'\n':
    case U'\r':
    case U'\v':
    case U'\f':
    case 0x00A0:  // no-break space
    case 0x1680:
    case 0x2028:
    case 0x2029:
    case 0x202F:
    case 0x205F:
    case 0x3000:
    case 0xFEFF:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

namespace {

bool is_word_char(char32_t cp) {
  if (cp >= U'0' && cp <= U'9') return true;
  if (cp >= U'A' && cp <= U'Z') return true;
  if (cp >= U'a' && cp <= U'z') return true;
  if (cp == U'-' || cp == U'\'') return true;
  return cp >= 0x80 && !is_word_whitespace(cp);
}

// Punctuation that gets peeled from run edges.
bool is_peelable(char32_t cp) { return !is_word_char(cp) && !is_word_whitespace(cp); }

void emit_run(std::u32string_view chars, std::size_t run_begin, std::size_t run_end,
              std::size_t offset, std::vector<Token>& out) {
  std::size_t f = run_begin;
  std::size_t b = run_end;  // exclusive
  std::vector<std::pair<std::size_t, std::size_t>> pieces;
  while (f < b && is_peelable(chars[f])) {
    pieces.emplace_back(f, f + 1);
    ++f;
  }
  std::size_t trailing_start = b;
  while (trailing_start > f && is_peelable(chars[trailing_start - 1])) --trailing_start;
  if (f < trailing_start) pieces.emplace_back(f, trailing_start);
  for (std::size_t k = trailing_start; k < b; ++k) pieces.emplace_back(k, k + 1);
  for (const auto& [lo, hi] : pieces) {
    Token token;
    token.text = encode_utf8(chars.substr(lo, hi - lo));
    token.span = CharSpan{offset + lo, offset + hi};
    out.push_back(std::move(token));
  }
}

std::vector<Token> tokenize_chars(std::u32string_view chars, std::size_t offset) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < chars.size()) {
    if (is_word_whitespace(chars[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < chars.size() && !is_word_whitespace(chars[j])) ++j;
    emit_run(chars, i, j, offset, out);
    i = j;
  }
  return out;
}

}  // namespace

std::vector<Token> tokenize(std::string_view sentence_text, std::size_t offset) {
  return tokenize_chars(decode_utf8(sentence_text), offset);
}

std::vector<Sentence> split_sentences(const Article& article) {
  const std::u32string chars = decode_utf8(article.text);
  std::vector<Sentence> sentences;
  std::size_t line_begin = 0;
  for (std::size_t i = 0; i <= chars.size(); ++i) {
    if (i < chars.size() && chars[i] != U'\n') continue;
    const std::size_t line_end = i;
    bool blank = true;
    for (std::size_t k = line_begin; k < line_end; ++k) {
      if (!is_word_whitespace(chars[k])) {
        blank = false;
        break;
      }
    }
    if (!blank) {
      Sentence s;
      s.article_id = article.id;
      s.span = CharSpan{line_begin, line_end};
      s.tokens = tokenize_chars(
          std::u32string_view(chars).substr(line_begin, line_end - line_begin), line_begin);
      sentences.push_back(std::move(s));
    }
    line_begin = i + 1;
  }
  return sentences;
}

TokenRange snap_span(CharSpan span, std::span<const Token> tokens) {
  TokenRange range;
  bool found = false;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (overlap_length(span, tokens[i].span) == 0) continue;
    if (!found) {
      range.begin = i;
      found = true;
    }
    range.end = i + 1;
  }
  if (!found) return TokenRange{};
  return range;
}

}  // namespace spantag
