#include "spantag/context.hpp"

#include <algorithm>
#include <charconv>

#include "spantag/errors.hpp"
#include "spantag/tokenizer.hpp"
#include "spantag/unicode.hpp"

namespace spantag {

std::string_view context_kind_name(ContextKind kind) {
  switch (kind) {
    case ContextKind::NONE:
      return "NONE";
    case ContextKind::SENTENCE:
      return "SENTENCE";
    case ContextKind::TITLE:
      return "TITLE";
  }
  throw std::invalid_argument("unknown context kind");
}

ContextKind context_kind_from_name(std::string_view name) {
  if (name == "NONE") return ContextKind::NONE;
  if (name == "SENTENCE") return ContextKind::SENTENCE;
  if (name == "TITLE") return ContextKind::TITLE;
  throw DataError("unknown context kind: '" + std::string(name) +
                  "' (expected NONE, SENTENCE or TITLE)");
}

ContextPair extract_sentence_context(const Article& article, CharSpan span,
                                     const ContextOptions& options) {
  if (span.begin >= span.end || span.end > text_length(article))
    throw DataError("span [" + std::to_string(span.begin) + ", " + std::to_string(span.end) +
                    ") outside article " + article.id);

  ContextPair pair;
  pair.article_id = article.id;
  pair.span = span;
  pair.kind = ContextKind::SENTENCE;
  pair.fragment_text = slice(article, span);

  // Window = all tokens of the sentences overlapping the span.
  std::vector<Token> window;
  for (const Sentence& sentence : split_sentences(article)) {
    if (overlap_length(sentence.span, span) == 0) continue;
    window.insert(window.end(), sentence.tokens.begin(), sentence.tokens.end());
  }
  const TokenRange fragment = snap_span(span, window);
  if (window.empty() || fragment.empty()) {
    // Nothing but whitespace around the span; the fragment is its own context.
    pair.context_text = pair.fragment_text;
    pair.context_span = span;
    return pair;
  }

  const std::size_t cap = options.cap_words;
  std::size_t left = fragment.begin;
  std::size_t right = fragment.end;  // exclusive
  if (options.cap_includes_fragment && fragment.size() > cap) {
    right = fragment.begin + cap;
  } else {
    std::size_t used = options.cap_includes_fragment ? fragment.size() : 0;
    bool take_left = true;
    while (used < cap && (left > 0 || right < window.size())) {
      if (take_left ? left > 0 : right < window.size()) {
        if (take_left)
          --left;
        else
          ++right;
        ++used;
      }
      take_left = !take_left;
    }
  }

  CharSpan ctx{window[left].span.begin, window[right - 1].span.end};
  // Cover the raw span too, so the fragment text stays a substring even when
  // its edges fall in whitespace (only possible while the fragment fits).
  if (!(options.cap_includes_fragment && fragment.size() > cap)) {
    ctx.begin = std::min(ctx.begin, span.begin);
    ctx.end = std::max(ctx.end, span.end);
  }
  pair.context_text = slice(article, ctx);
  pair.context_span = ctx;
  return pair;
}

ContextPair extract_title_context(const Article& article) {
  ContextPair pair;
  pair.article_id = article.id;
  pair.span = CharSpan{0, 0};
  pair.kind = ContextKind::TITLE;
  pair.context_text = article.title;
  return pair;
}

std::vector<ContextPair> build_tc_dataset(std::span<const Article> articles,
                                          std::span<const SpanAnnotation> annotations,
                                          ContextKind kind, const ContextOptions& options) {
  const auto index = index_articles(articles);
  std::vector<ContextPair> pairs;
  pairs.reserve(annotations.size());
  for (const SpanAnnotation& ann : annotations) {
    const auto it = index.find(ann.article_id);
    if (it == index.end())
      throw DataError("annotation references missing article " + ann.article_id);
    const Article& article = *it->second;
    ContextPair pair;
    switch (kind) {
      case ContextKind::SENTENCE:
        pair = extract_sentence_context(article, ann.span, options);
        break;
      case ContextKind::TITLE:
        pair = extract_title_context(article);
        pair.span = ann.span;
        pair.fragment_text = slice(article, ann.span);
        break;
      case ContextKind::NONE:
        pair.article_id = article.id;
        pair.span = ann.span;
        pair.kind = ContextKind::NONE;
        pair.fragment_text = slice(article, ann.span);
        break;
    }
    pair.technique = ann.technique;
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

namespace {

std::string escape_field(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (char c : text) {
    switch (c) {
      case '\\':
        out += "\\\\";
        break;
      case '\t':
        out += "\\t";
        break;
      case '\n':
        out += "\\n";
        break;
      default:
        out += c;
    }
  }
  return out;
}

std::string unescape_field(std::string_view text, const std::string& where) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '\\') {
      out += text[i];
      continue;
    }
    if (i + 1 >= text.size()) throw DataError(where + ": dangling escape");
    ++i;
    switch (text[i]) {
      case '\\':
        out += '\\';
        break;
      case 't':
        out += '\t';
        break;
      case 'n':
        out += '\n';
        break;
      default:
        throw DataError(where + ": unknown escape \\" + std::string(1, text[i]));
    }
  }
  return out;
}

std::size_t parse_number(std::string_view field, const std::string& where) {
  std::size_t value = 0;
  const auto [ptr, err] = std::from_chars(field.data(), field.data() + field.size(), value);
  if (err != std::errc() || ptr != field.data() + field.size() || field.empty())
    throw DataError(where + ": bad offset '" + std::string(field) + "'");
  return value;
}

}  // namespace

std::string write_context_pairs(std::span<const ContextPair> pairs) {
  std::string out;
  for (const ContextPair& pair : pairs) {
    out += pair.article_id;
    out += '\t';
    out += std::to_string(pair.span.begin);
    out += '\t';
    out += std::to_string(pair.span.end);
    out += '\t';
    out += pair.technique ? escape_field(*pair.technique) : "-";
    out += '\t';
    out += context_kind_name(pair.kind);
    out += '\t';
    out += escape_field(pair.fragment_text);
    out += '\t';
    out += escape_field(pair.context_text);
    out += '\n';
  }
  return out;
}

std::vector<ContextPair> parse_context_pairs(std::string_view tsv_text, std::string_view source) {
  std::vector<ContextPair> pairs;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < tsv_text.size()) {
    std::size_t nl = tsv_text.find('\n', pos);
    if (nl == std::string_view::npos) nl = tsv_text.size();
    std::string_view line = tsv_text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = nl + 1;
    ++line_no;
    const std::string where =
        (source.empty() ? std::string("line ") : std::string(source) + ":line ") +
        std::to_string(line_no);
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t tab = line.find('\t', start);
      if (tab == std::string_view::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, tab - start));
      start = tab + 1;
    }
    if (fields.size() != 7)
      throw DataError(where + ": expected 7 tab-separated fields, got " +
                      std::to_string(fields.size()));
    ContextPair pair;
    pair.article_id = std::string(fields[0]);
    pair.span.begin = parse_number(fields[1], where);
    pair.span.end = parse_number(fields[2], where);
    if (fields[3] != "-") pair.technique = unescape_field(fields[3], where);
    try {
      pair.kind = context_kind_from_name(fields[4]);
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
    pair.fragment_text = unescape_field(fields[5], where);
    pair.context_text = unescape_field(fields[6], where);
    pairs.push_back(std::move(pair));
  }
  return pairs;
}

}  // namespace spantag
