#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spantag/corpus.hpp"

namespace spantag {

enum class ContextKind { NONE, SENTENCE, TITLE };

std::string_view context_kind_name(ContextKind kind);
ContextKind context_kind_from_name(std::string_view name);  // throws DataError

// One (fragment, context) classification instance. fragment_text is the
// exact article slice at `span`; context_span is the character range the
// SENTENCE context was cut from (absent for TITLE/NONE).
struct ContextPair {
  std::string article_id;
  CharSpan span;
  std::optional<std::string> technique;
  ContextKind kind = ContextKind::NONE;
  std::string fragment_text;
  std::string context_text;
  std::optional<CharSpan> context_span;
};

struct ContextOptions {
  std::size_t cap_words = 130;
  // Whether the fragment's own words count against the cap.
  bool cap_includes_fragment = true;
};

// Sentence-window context around a fragment. The window is every sentence
// overlapping the span; starting from the fragment's words, whole words are
// added alternately left then right until a side hits the window boundary
// or the word total reaches the cap (leftover budget flows to the other
// side). A fragment longer than the cap is truncated to the cap.
ContextPair extract_sentence_context(const Article& article, CharSpan span,
                                     const ContextOptions& options = {});

/// Fragmentless TITLE context: the article's first line.
ContextPair extract_title_context(const Article& article);

// One pair per TC annotation, order preserved; duplicated multi-label
// fragments yield multiple pairs. Throws DataError when an annotation
// references a missing article.
std::vector<ContextPair> build_tc_dataset(std::span<const Article> articles,
                                          std::span<const SpanAnnotation> annotations,
                                          ContextKind kind, const ContextOptions& options = {});

// TSV: article_id, begin, end, technique (or "-"), kind, fragment, context.
// Backslash, tab and newline inside texts are escaped as \\, \t, \n.
std::string write_context_pairs(std::span<const ContextPair> pairs);
std::vector<ContextPair> parse_context_pairs(std::string_view tsv_text,
                                             std::string_view source = {});

}  // namespace spantag
