#include "spantag/tagcodec.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

#include "spantag/errors.hpp"

namespace spantag {

namespace {

constexpr std::array<Tag, 2> kPnp = {Tag::O, Tag::P};
constexpr std::array<Tag, 3> kBio = {Tag::O, Tag::B, Tag::I};
constexpr std::array<Tag, 4> kBioe = {Tag::O, Tag::B, Tag::I, Tag::E};
constexpr std::array<Tag, 5> kBioes = {Tag::O, Tag::B, Tag::I, Tag::E, Tag::S};

}  // namespace

std::span<const Tag> scheme_alphabet(Scheme scheme) {
  switch (scheme) {
    case Scheme::PNP:
      return kPnp;
    case Scheme::BIO:
      return kBio;
    case Scheme::BIOE:
      return kBioe;
    case Scheme::BIOES:
      return kBioes;
  }
  throw std::invalid_argument("unknown scheme");
}

bool scheme_allows(Scheme scheme, Tag tag) {
  const auto alphabet = scheme_alphabet(scheme);
  return std::find(alphabet.begin(), alphabet.end(), tag) != alphabet.end();
}

std::size_t scheme_label_count(Scheme scheme) { return scheme_alphabet(scheme).size(); }

std::size_t scheme_label_index(Scheme scheme, Tag tag) {
  const auto alphabet = scheme_alphabet(scheme);
  const auto it = std::find(alphabet.begin(), alphabet.end(), tag);
  if (it == alphabet.end())
    throw std::invalid_argument(std::string("label ") + tag_letter(tag) + " outside scheme " +
                                std::string(scheme_name(scheme)));
  return static_cast<std::size_t>(it - alphabet.begin());
}

char tag_letter(Tag tag) {
  switch (tag) {
    case Tag::O:
      return 'O';
    case Tag::P:
      return 'P';
    case Tag::B:
      return 'B';
    case Tag::I:
      return 'I';
    case Tag::E:
      return 'E';
    case Tag::S:
      return 'S';
  }
  throw std::invalid_argument("unknown tag");
}

Tag tag_from_letter(char letter) {
  switch (letter) {
    case 'O':
      return Tag::O;
    case 'P':
      return Tag::P;
    case 'B':
      return Tag::B;
    case 'I':
      return Tag::I;
    case 'E':
      return Tag::E;
    case 'S':
      return Tag::S;
    default:
      throw std::invalid_argument(std::string("unknown tag letter '") + letter + "'");
  }
}

std::string_view scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::PNP:
      return "PNP";
    case Scheme::BIO:
      return "BIO";
    case Scheme::BIOE:
      return "BIOE";
    case Scheme::BIOES:
      return "BIOES";
  }
  throw std::invalid_argument("unknown scheme");
}

Scheme scheme_from_name(std::string_view name) {
  if (name == "PNP") return Scheme::PNP;
  if (name == "BIO") return Scheme::BIO;
  if (name == "BIOE") return Scheme::BIOE;
  if (name == "BIOES") return Scheme::BIOES;
  throw DataError("unknown tagging scheme: '" + std::string(name) +
                  "' (expected PNP, BIO, BIOE or BIOES)");
}

bool is_positive(Tag tag) { return tag != Tag::O; }

TagSequence make_tag_sequence(Scheme scheme, std::vector<Tag> labels) {
  for (Tag t : labels) {
    if (!scheme_allows(scheme, t))
      throw std::invalid_argument(std::string("label ") + tag_letter(t) + " outside scheme " +
                                  std::string(scheme_name(scheme)));
  }
  return TagSequence{scheme, std::move(labels)};
}

namespace {

std::vector<TokenRange> union_ranges(std::vector<TokenRange> spans) {
  std::erase_if(spans, [](const TokenRange& r) { return r.empty(); });
  std::sort(spans.begin(), spans.end(),
            [](const TokenRange& a, const TokenRange& b) { return a.begin < b.begin; });
  std::vector<TokenRange> merged;
  for (const TokenRange& r : spans) {
    if (!merged.empty() && r.begin <= merged.back().end)
      merged.back().end = std::max(merged.back().end, r.end);
    else
      merged.push_back(r);
  }
  return merged;
}

void write_run(Scheme scheme, std::size_t n, std::vector<Tag>& labels, std::size_t at) {
  switch (scheme) {
    case Scheme::PNP:
      for (std::size_t k = 0; k < n; ++k) labels[at + k] = Tag::P;
      break;
    case Scheme::BIO:
      labels[at] = Tag::B;
      for (std::size_t k = 1; k < n; ++k) labels[at + k] = Tag::I;
      break;
    case Scheme::BIOE:
      labels[at] = Tag::B;
      for (std::size_t k = 1; k + 1 < n; ++k) labels[at + k] = Tag::I;
      if (n >= 2) labels[at + n - 1] = Tag::E;
      break;
    case Scheme::BIOES:
      if (n == 1) {
        labels[at] = Tag::S;
      } else {
        labels[at] = Tag::B;
        for (std::size_t k = 1; k + 1 < n; ++k) labels[at + k] = Tag::I;
        labels[at + n - 1] = Tag::E;
      }
      break;
  }
}

}  // namespace

TagSequence encode_tags(Scheme scheme, std::size_t token_count, std::vector<TokenRange> spans) {
  const std::vector<TokenRange> runs = union_ranges(std::move(spans));
  std::vector<Tag> labels(token_count, Tag::O);
  for (const TokenRange& run : runs) {
    if (run.end > token_count)
      throw std::invalid_argument("token range [" + std::to_string(run.begin) + ", " +
                                  std::to_string(run.end) + ") exceeds token count " +
                                  std::to_string(token_count));
    write_run(scheme, run.size(), labels, run.begin);
  }
  return TagSequence{scheme, std::move(labels)};
}

std::vector<TokenRange> positive_runs(const TagSequence& tags) {
  std::vector<TokenRange> runs;
  std::size_t i = 0;
  while (i < tags.labels.size()) {
    if (!is_positive(tags.labels[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < tags.labels.size() && is_positive(tags.labels[j])) ++j;
    runs.push_back(TokenRange{i, j});
    i = j;
  }
  return runs;
}

std::vector<CharSpan> decode_tags(const TagSequence& tags, std::span<const Token> tokens) {
  if (tags.labels.size() != tokens.size())
    throw std::invalid_argument("tag sequence length " + std::to_string(tags.labels.size()) +
                                " does not match token count " + std::to_string(tokens.size()));
  std::vector<CharSpan> spans;
  for (const TokenRange& run : positive_runs(tags))
    spans.push_back(CharSpan{tokens[run.begin].span.begin, tokens[run.end - 1].span.end});
  return spans;
}

std::vector<TagViolation> validate_tags(const TagSequence& tags) {
  std::vector<TagViolation> violations;
  const Scheme scheme = tags.scheme;
  if (scheme == Scheme::PNP) return violations;

  const auto& labels = tags.labels;
  const std::size_t n = labels.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Tag t = labels[i];
    const Tag prev = i > 0 ? labels[i - 1] : Tag::O;
    if ((t == Tag::I || t == Tag::E) && prev != Tag::B && prev != Tag::I)
      violations.push_back(
          {i, std::string(1, tag_letter(t)) + " without preceding B at index " + std::to_string(i)});
    if (scheme == Scheme::BIOES && t == Tag::S) {
      const bool prev_pos = i > 0 && is_positive(labels[i - 1]);
      const bool next_pos = i + 1 < n && is_positive(labels[i + 1]);
      if (prev_pos || next_pos)
        violations.push_back({i, "S adjacent to a positive run at index " + std::to_string(i)});
    }
  }

  if (scheme == Scheme::BIOE || scheme == Scheme::BIOES) {
    // A run opened by B must close with E. Under BIOE a lone B is a valid
    // single-token span; under BIOES singletons must be S.
    std::size_t i = 0;
    while (i < n) {
      if (labels[i] != Tag::B) {
        ++i;
        continue;
      }
      std::size_t j = i + 1;
      while (j < n && labels[j] == Tag::I) ++j;
      const bool closed = j < n && labels[j] == Tag::E;
      if (!closed) {
        const std::size_t last = j - 1;  // last token of the B/I chain
        if (last > i || scheme == Scheme::BIOES)
          violations.push_back({last, "unterminated B-run at index " + std::to_string(last)});
        i = j;
        continue;
      }
      i = j + 1;
    }
  }

  std::sort(violations.begin(), violations.end(),
            [](const TagViolation& a, const TagViolation& b) { return a.index < b.index; });
  return violations;
}

TagSequence convert_tags(const TagSequence& tags, Scheme target) {
  return encode_tags(target, tags.labels.size(), positive_runs(tags));
}

std::string format_tags(const TagSequence& tags) {
  std::string out;
  for (std::size_t i = 0; i < tags.labels.size(); ++i) {
    if (i > 0) out += ' ';
    out += tag_letter(tags.labels[i]);
  }
  return out;
}

TagSequence parse_tags(std::string_view line, Scheme scheme) {
  std::vector<Tag> labels;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == ' ' || line[i] == '\t' || line[i] == '\r') {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    const std::string_view word = line.substr(i, j - i);
    if (word.size() != 1)
      throw DataError("bad tag token '" + std::string(word) + "' (expected a single letter)");
    Tag t;
    try {
      t = tag_from_letter(word[0]);
    } catch (const std::invalid_argument& e) {
      throw DataError(e.what());
    }
    if (!scheme_allows(scheme, t))
      throw DataError(std::string("label ") + word[0] + " outside scheme " +
                      std::string(scheme_name(scheme)));
    labels.push_back(t);
    i = j;
  }
  return TagSequence{scheme, std::move(labels)};
}

}  // namespace spantag
