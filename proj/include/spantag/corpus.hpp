#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace spantag {

// Half-open character-offset interval [begin, end). Offsets count Unicode
// scalar values of the article text, not bytes.
struct CharSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t length() const { return end - begin; }
  bool operator==(const CharSpan&) const = default;
  auto operator<=>(const CharSpan&) const = default;
};

/// Character count shared by two half-open spans.
std::size_t overlap_length(CharSpan a, CharSpan b);

// A news document. `text` holds the exact file contents; `title` is the
// first line (everything before the first newline).
struct Article {
  std::string id;
  std::string text;
  std::string title;
};

/// Builds an Article from an id and raw text, deriving the title line.
Article make_article(std::string id, std::string text);

// Loads one plain-text UTF-8 article. The id is the first maximal digit run
// in the file's basename ("article123.txt" -> "123"). Distinct DataErrors
// for a missing file, undecodable bytes and an id-less filename.
Article load_article(const std::filesystem::path& path);

/// Loads every *.txt article in a directory, sorted by numeric id.
std::vector<Article> load_articles(const std::filesystem::path& dir);

/// Article text length in characters (Unicode scalar values).
std::size_t text_length(const Article& article);

/// Slice of the article text by character offsets; throws DataError when the
/// span does not fit the text.
std::string slice(const Article& article, CharSpan span);

std::map<std::string, const Article*> index_articles(std::span<const Article> articles);

/// Orders digit-string ids numerically ("9" before "10").
bool id_less(const std::string& a, const std::string& b);

struct SpanAnnotation {
  std::string article_id;
  CharSpan span;
  std::optional<std::string> technique;

  bool operator==(const SpanAnnotation&) const = default;
};

enum class AnnotationKind { SI, TC };

// Parses a tab-separated label file. SI rows have 3 fields (id, begin, end);
// TC rows have 4 (id, technique, begin, end). Row order is preserved and
// duplicated fragments with different techniques stay distinct records.
// Errors carry the 1-based line number, prefixed with `source` when given.
std::vector<SpanAnnotation> parse_annotations(std::string_view tsv_text, AnnotationKind kind,
                                              std::string_view source = {});

// Inverse of parse_annotations: one row per annotation in the given order,
// trailing newline after the last row, empty input -> empty string.
std::string write_annotations(std::span<const SpanAnnotation> annotations, AnnotationKind kind);

// Ordered inventory of technique names; indices follow the lexicographically
// sorted name list. 14 entries on the official corpus.
struct LabelInventory {
  std::vector<std::string> names;

  std::size_t size() const { return names.size(); }
  std::optional<std::size_t> find(const std::string& name) const;
  /// Index of a known technique; throws DataError for unknown names.
  std::size_t index_of(const std::string& name) const;
  bool operator==(const LabelInventory&) const = default;
};

LabelInventory build_label_inventory(std::span<const SpanAnnotation> annotations);

// Checks every annotation offset against the article length; returns one
// message per violation. Nothing is ever clipped.
std::vector<std::string> validate_offsets(const Article& article,
                                          std::span<const SpanAnnotation> annotations);

}  // namespace spantag
