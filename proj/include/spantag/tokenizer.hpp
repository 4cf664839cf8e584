#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spantag/corpus.hpp"

namespace spantag {

// Token text is the exact slice of the article at `span` (character
// offsets are absolute into the article).
struct Token {
  std::string text;
  CharSpan span;

  bool operator==(const Token&) const = default;
};

struct Sentence {
  std::string article_id;
  CharSpan span;
  std::vector<Token> tokens;
};

// Sentence boundary is the newline: each non-blank line becomes one
// sentence with its exact character span; blank (empty or whitespace-only)
// lines produce none.
std::vector<Sentence> split_sentences(const Article& article);

// Offset-preserving word tokenizer: maximal non-whitespace runs, with
// leading/trailing punctuation (non-alphanumeric, non-hyphen,
// non-apostrophe) peeled off as single-character tokens. Non-ASCII
// codepoints count as word characters. Detokenizing via the spans
// reproduces the input.
std::vector<Token> tokenize(std::string_view sentence_text, std::size_t offset);

// Half-open range of token indices.
struct TokenRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  bool empty() const { return begin >= end; }
  std::size_t size() const { return empty() ? 0 : end - begin; }
  bool operator==(const TokenRange&) const = default;
};

// Contiguous range of tokens with any nonzero character overlap with the
// span; empty when no token overlaps. Tokens must be ordered by begin.
TokenRange snap_span(CharSpan span, std::span<const Token> tokens);

bool is_word_whitespace(char32_t cp);

}  // namespace spantag
