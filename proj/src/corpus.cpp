#include "spantag/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "spantag/errors.hpp"
#include "spantag/unicode.hpp"

namespace spantag {

std::size_t overlap_length(CharSpan a, CharSpan b) {
  const std::size_t lo = std::max(a.begin, b.begin);
  const std::size_t hi = std::min(a.end, b.end);
  return hi > lo ? hi - lo : 0;
}

Article make_article(std::string id, std::string text) {
  Article article;
  article.id = std::move(id);
  const std::size_t nl = text.find('\n');
  article.title = nl == std::string::npos ? text : text.substr(0, nl);
  article.text = std::move(text);
  return article;
}

namespace {

std::string extract_id(const std::filesystem::path& path) {
  const std::string name = path.filename().string();
  std::size_t i = 0;
  while (i < name.size() && !std::isdigit(static_cast<unsigned char>(name[i]))) ++i;
  std::size_t j = i;
  while (j < name.size() && std::isdigit(static_cast<unsigned char>(name[j]))) ++j;
  if (i == j) throw DataError("no digits in filename: " + name);
  return name.substr(i, j - i);
}

}  // namespace

Article load_article(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec))
    throw DataError("article file not found: " + path.string());
  const std::string id = extract_id(path);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open article file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  std::string text = buf.str();
  try {
    decode_utf8(text);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return make_article(id, std::move(text));
}

bool id_less(const std::string& a, const std::string& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

std::vector<Article> load_articles(const std::filesystem::path& dir) {
  std::error_code ec;
  if (!std::filesystem::is_directory(dir, ec))
    throw DataError("article directory not found: " + dir.string());
  std::vector<std::filesystem::path> paths;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt")
      paths.push_back(entry.path());
  }
  std::vector<Article> articles;
  articles.reserve(paths.size());
  for (const auto& p : paths) articles.push_back(load_article(p));
  std::sort(articles.begin(), articles.end(),
            [](const Article& x, const Article& y) { return id_less(x.id, y.id); });
  for (std::size_t i = 1; i < articles.size(); ++i)
    if (articles[i].id == articles[i - 1].id)
      throw DataError("duplicate article id " + articles[i].id + " in " + dir.string());
  return articles;
}

std::size_t text_length(const Article& article) { return utf8_length(article.text); }

std::string slice(const Article& article, CharSpan span) {
  try {
    return utf8_slice(article.text, span.begin, span.end);
  } catch (const std::out_of_range&) {
    throw DataError("span [" + std::to_string(span.begin) + ", " + std::to_string(span.end) +
                    ") outside article " + article.id + " of length " +
                    std::to_string(text_length(article)));
  }
}

std::map<std::string, const Article*> index_articles(std::span<const Article> articles) {
  std::map<std::string, const Article*> index;
  for (const Article& a : articles) index[a.id] = &a;
  return index;
}

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
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
  return fields;
}

std::size_t parse_offset(std::string_view field, std::string_view what, const std::string& where) {
  std::size_t value = 0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto [ptr, err] = std::from_chars(first, last, value);
  if (err != std::errc() || ptr != last || field.empty())
    throw DataError(where + ": " + std::string(what) + " is not a non-negative integer: '" +
                    std::string(field) + "'");
  return value;
}

}  // namespace

std::vector<SpanAnnotation> parse_annotations(std::string_view tsv_text, AnnotationKind kind,
                                              std::string_view source) {
  const std::size_t want = kind == AnnotationKind::SI ? 3 : 4;
  std::vector<SpanAnnotation> out;
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
    const auto fields = split_fields(line);
    if (fields.size() != want)
      throw DataError(where + ": expected " + std::to_string(want) + " tab-separated fields, got " +
                      std::to_string(fields.size()));
    SpanAnnotation ann;
    ann.article_id = std::string(fields[0]);
    std::size_t off = 1;
    if (kind == AnnotationKind::TC) {
      if (fields[1].empty()) throw DataError(where + ": empty technique field");
      ann.technique = std::string(fields[1]);
      off = 2;
    }
    ann.span.begin = parse_offset(fields[off], "begin offset", where);
    ann.span.end = parse_offset(fields[off + 1], "end offset", where);
    if (ann.span.begin >= ann.span.end)
      throw DataError(where + ": begin " + std::to_string(ann.span.begin) + " >= end " +
                      std::to_string(ann.span.end));
    out.push_back(std::move(ann));
  }
  return out;
}

std::string write_annotations(std::span<const SpanAnnotation> annotations, AnnotationKind kind) {
  std::string out;
  for (const SpanAnnotation& ann : annotations) {
    if (kind == AnnotationKind::TC && !ann.technique)
      throw DataError("TC record for article " + ann.article_id + " has no technique");
    if (kind == AnnotationKind::SI && ann.technique)
      throw DataError("SI record for article " + ann.article_id + " carries a technique");
    out += ann.article_id;
    out += '\t';
    if (kind == AnnotationKind::TC) {
      out += *ann.technique;
      out += '\t';
    }
    out += std::to_string(ann.span.begin);
    out += '\t';
    out += std::to_string(ann.span.end);
    out += '\n';
  }
  return out;
}

std::optional<std::size_t> LabelInventory::find(const std::string& name) const {
  const auto it = std::lower_bound(names.begin(), names.end(), name);
  if (it == names.end() || *it != name) return std::nullopt;
  return static_cast<std::size_t>(it - names.begin());
}

std::size_t LabelInventory::index_of(const std::string& name) const {
  const auto idx = find(name);
  if (!idx) throw DataError("unknown technique: " + name);
  return *idx;
}

LabelInventory build_label_inventory(std::span<const SpanAnnotation> annotations) {
  if (annotations.empty()) throw DataError("cannot build a label inventory from no annotations");
  std::set<std::string> names;
  for (const SpanAnnotation& ann : annotations) {
    if (!ann.technique)
      throw DataError("annotation for article " + ann.article_id + " has no technique");
    names.insert(*ann.technique);
  }
  LabelInventory inventory;
  inventory.names.assign(names.begin(), names.end());
  return inventory;
}

std::vector<std::string> validate_offsets(const Article& article,
                                          std::span<const SpanAnnotation> annotations) {
  std::vector<std::string> problems;
  const std::size_t len = text_length(article);
  for (const SpanAnnotation& ann : annotations) {
    if (ann.article_id != article.id) continue;
    if (ann.span.begin >= ann.span.end)
      problems.push_back("article " + article.id + ": empty span [" +
                         std::to_string(ann.span.begin) + ", " + std::to_string(ann.span.end) +
                         ")");
    else if (ann.span.end > len)
      problems.push_back("article " + article.id + ": span [" + std::to_string(ann.span.begin) +
                         ", " + std::to_string(ann.span.end) + ") exceeds text length " +
                         std::to_string(len));
  }
  return problems;
}

}  // namespace spantag
