#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spantag/corpus.hpp"
#include "spantag/tokenizer.hpp"

namespace spantag {

// Tagging schemes and their label sets:
//   PNP   {P, O}          BIO   {B, I, O}
//   BIOE  {B, I, O, E}    BIOES {B, I, O, E, S}
enum class Scheme { PNP, BIO, BIOE, BIOES };

enum class Tag : unsigned char { O, P, B, I, E, S };

/// Label set of a scheme, in the model's fixed class order.
std::span<const Tag> scheme_alphabet(Scheme scheme);
bool scheme_allows(Scheme scheme, Tag tag);
std::size_t scheme_label_count(Scheme scheme);
std::size_t scheme_label_index(Scheme scheme, Tag tag);

char tag_letter(Tag tag);
Tag tag_from_letter(char letter);  // throws std::invalid_argument

std::string_view scheme_name(Scheme scheme);
Scheme scheme_from_name(std::string_view name);  // throws DataError

/// A token labeled P, B, I, E or S is part of a propaganda span.
bool is_positive(Tag tag);

// One label per token under a scheme. Construct via make_tag_sequence so
// every label is checked against the scheme's set.
struct TagSequence {
  Scheme scheme = Scheme::BIOE;
  std::vector<Tag> labels;

  std::size_t size() const { return labels.size(); }
  bool operator==(const TagSequence&) const = default;
};

TagSequence make_tag_sequence(Scheme scheme, std::vector<Tag> labels);

// Encodes token-aligned span ranges as per-token tags. Overlapping or
// adjacent ranges are unioned first. Within each maximal positive run of
// length n:
//   PNP:   P*n
//   BIO:   B I*(n-1)
//   BIOE:  n=1 -> B;  n=2 -> B E;  n>=3 -> B I*(n-2) E
//   BIOES: n=1 -> S;  n>=2 -> B I*(n-2) E
TagSequence encode_tags(Scheme scheme, std::size_t token_count, std::vector<TokenRange> spans);

/// Maximal runs of consecutive positive tokens, regardless of structure.
std::vector<TokenRange> positive_runs(const TagSequence& tags);

// Decode by positivity: every positive token counts, consecutive positive
// tokens merge, each run maps to [first token begin, last token end).
// Structural validity is not required.
std::vector<CharSpan> decode_tags(const TagSequence& tags, std::span<const Token> tokens);

struct TagViolation {
  std::size_t index = 0;
  std::string message;

  bool operator==(const TagViolation&) const = default;
};

// Structural sanity check. Flags I/E without a preceding B/I, positive runs
// that continue past a B without closing E (BIOE/BIOES; a lone B is a legal
// single-token span under BIOE only), lone B under BIOES, and S adjacent to
// another positive token. Encoded sequences always pass.
std::vector<TagViolation> validate_tags(const TagSequence& tags);

/// Re-encodes the decoded token runs under another scheme.
TagSequence convert_tags(const TagSequence& tags, Scheme target);

/// One sentence per line, space-separated labels.
std::string format_tags(const TagSequence& tags);
TagSequence parse_tags(std::string_view line, Scheme scheme);

}  // namespace spantag
