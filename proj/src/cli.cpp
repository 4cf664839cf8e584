#include "spantag/cli.hpp"

#include <algorithm>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "spantag/analytics.hpp"
#include "spantag/errors.hpp"
#include "spantag/random.hpp"
#include "spantag/scorer.hpp"
#include "spantag/unicode.hpp"

namespace fs = std::filesystem;

namespace spantag::cli {

std::pair<std::vector<std::string>, std::vector<std::string>> split_train_dev(
    std::vector<std::string> article_ids, double fraction, std::uint64_t seed) {
  if (article_ids.empty()) throw DataError("cannot split an empty article list");
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw std::invalid_argument("split fraction must lie in (0, 1]");
  SeededRng rng(seed);
  rng.shuffle(article_ids);
  const auto n = static_cast<std::size_t>(
      std::llround(fraction * static_cast<double>(article_ids.size())));
  const std::size_t train_n = std::min(n, article_ids.size());
  std::vector<std::string> train(article_ids.begin(), article_ids.begin() + train_n);
  std::vector<std::string> dev(article_ids.begin() + train_n, article_ids.end());
  return {std::move(train), std::move(dev)};
}

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write file: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw DataError("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw DataError("cannot rename " + tmp.string() + " to " + path.string());
}

std::string format_metric(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string hex64(std::uint64_t v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string digest_file(const fs::path& path) { return hex64(fnv1a64(read_file(path))); }

std::string digest_dir(const fs::path& dir) {
  std::vector<fs::path> paths;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file()) paths.push_back(entry.path());
  std::sort(paths.begin(), paths.end());
  std::string combined;
  for (const fs::path& p : paths)
    combined += p.filename().string() + ":" + digest_file(p) + "\n";
  return hex64(fnv1a64(combined));
}

// Flat key=value run record written next to each output; replays with
// `spantag <subcommand> --config <manifest>`.
class Manifest {
 public:
  explicit Manifest(std::string subcommand) : subcommand_(std::move(subcommand)) {}

  void set(const std::string& key, const std::string& value) {
    entries_.emplace_back(key, value);
  }
  void set(const std::string& key, std::size_t value) { set(key, std::to_string(value)); }
  void set(const std::string& key, double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    set(key, std::string(buf));
  }
  void set_flag(const std::string& key, bool value) { set(key, value ? "true" : "false"); }

  void input_file(const fs::path& path) {
    inputs_.push_back("# input " + path.string() + " fnv1a=" + digest_file(path));
  }
  void input_dir(const fs::path& path) {
    inputs_.push_back("# input " + path.string() + "/ fnv1a=" + digest_dir(path));
  }

  std::string str() const {
    std::string out = "# spantag manifest\n# subcommand: " + subcommand_ +
                      "\n# replay: spantag " + subcommand_ + " --config <this file>\n";
    for (const auto& [key, value] : entries_) {
      std::string v = value;
      if (v.empty() || v.find_first_of(" \t#\"") != std::string::npos) v = "\"" + v + "\"";
      out += key + "=" + v + "\n";
    }
    for (const std::string& line : inputs_) out += line + "\n";
    return out;
  }

  void write_for(const fs::path& output) const {
    fs::path path = output;
    path += ".manifest";
    write_file_atomic(path, str());
  }

 private:
  std::string subcommand_;
  std::vector<std::pair<std::string, std::string>> entries_;
  std::vector<std::string> inputs_;
};

// Flat key=value config support. CLI11 2.4 does not process set_config on
// subcommands, so the file is expanded into --key=value tokens injected
// before the user's flags; TakeLast policy makes explicit flags win.
std::vector<std::string> config_tokens(const fs::path& path) {
  const std::string text = read_file(path);
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  const std::string_view view(text);
  while (pos < view.size()) {
    std::size_t nl = view.find('\n', pos);
    if (nl == std::string_view::npos) nl = view.size();
    std::string_view line = view.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = nl + 1;
    ++line_no;
    while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) line.remove_prefix(1);
    if (line.empty() || line.front() == '#') continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw DataError(path.string() + ":line " + std::to_string(line_no) +
                      ": expected key=value");
    std::string_view key = line.substr(0, eq);
    while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.remove_suffix(1);
    std::string_view value = line.substr(eq + 1);
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
      value = value.substr(1, value.size() - 2);
    if (key.empty())
      throw DataError(path.string() + ":line " + std::to_string(line_no) + ": empty key");
    tokens.push_back("--" + std::string(key) + "=" + std::string(value));
  }
  return tokens;
}

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size())
      config_path = args[i + 1];
    else if (args[i].starts_with("--config="))
      config_path = args[i].substr(9);
  }
  if (config_path.empty() || args.empty() || args.front().starts_with("-")) return args;
  std::vector<std::string> expanded;
  expanded.push_back(args.front());  // the subcommand
  for (const std::string& token : config_tokens(config_path)) expanded.push_back(token);
  expanded.insert(expanded.end(), args.begin() + 1, args.end());
  return expanded;
}

AnnotationKind sniff_annotation_kind(std::string_view tsv, const std::string& source) {
  std::size_t pos = 0;
  while (pos < tsv.size()) {
    std::size_t nl = tsv.find('\n', pos);
    if (nl == std::string_view::npos) nl = tsv.size();
    const std::string_view line = tsv.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    const std::size_t tabs = static_cast<std::size_t>(std::count(line.begin(), line.end(), '\t'));
    if (tabs == 2) return AnnotationKind::SI;
    if (tabs == 3) return AnnotationKind::TC;
    throw DataError(source + ": expected 3 (SI) or 4 (TC) tab-separated fields, got " +
                    std::to_string(tabs + 1));
  }
  return AnnotationKind::SI;  // empty file, kind is irrelevant
}

std::vector<SpanAnnotation> load_annotations(const fs::path& path, AnnotationKind kind) {
  return parse_annotations(read_file(path), kind, path.string());
}

std::vector<SpanAnnotation> load_annotations_auto(const fs::path& path) {
  const std::string text = read_file(path);
  return parse_annotations(text, sniff_annotation_kind(text, path.string()), path.string());
}

std::map<std::string, std::vector<CharSpan>> spans_by_article(
    std::span<const SpanAnnotation> annotations) {
  std::map<std::string, std::vector<CharSpan>> grouped;
  for (const SpanAnnotation& ann : annotations) grouped[ann.article_id].push_back(ann.span);
  return grouped;
}

void check_references(std::span<const Article> articles,
                      std::span<const SpanAnnotation> annotations, const std::string& what) {
  const auto index = index_articles(articles);
  std::set<std::string> missing;
  for (const SpanAnnotation& ann : annotations)
    if (!index.contains(ann.article_id)) missing.insert(ann.article_id);
  if (!missing.empty()) {
    std::string ids;
    for (const std::string& id : missing) {
      if (!ids.empty()) ids += ", ";
      ids += id;
    }
    throw DataError(what + " references missing articles: " + ids);
  }
}

void check_offsets(std::span<const Article> articles,
                   std::span<const SpanAnnotation> annotations, const std::string& what) {
  std::vector<std::string> problems;
  for (const Article& article : articles) {
    const auto found = validate_offsets(article, annotations);
    problems.insert(problems.end(), found.begin(), found.end());
  }
  if (!problems.empty()) {
    for (const std::string& p : problems) std::cerr << p << "\n";
    throw DataError(what + ": " + std::to_string(problems.size()) + " offset violations");
  }
}

std::vector<std::string> article_ids(std::span<const Article> articles) {
  std::vector<std::string> ids;
  ids.reserve(articles.size());
  for (const Article& a : articles) ids.push_back(a.id);
  return ids;
}

std::vector<SpanAnnotation> filter_by_ids(std::span<const SpanAnnotation> annotations,
                                          const std::set<std::string>& keep) {
  std::vector<SpanAnnotation> out;
  for (const SpanAnnotation& ann : annotations)
    if (keep.contains(ann.article_id)) out.push_back(ann);
  return out;
}

SequenceEncoder make_encoder(std::size_t dim, const std::string& vectors_path) {
  if (vectors_path.empty()) return SequenceEncoder(dim);
  const fs::path path(vectors_path);
  return SequenceEncoder(dim, VectorStore::parse_tsv(read_file(path), path.string()));
}

// ---------------------------------------------------------------------------
// Subcommands

struct IngestOpts {
  std::string articles;
  std::string si_labels;
  std::string tc_labels;
};

void run_ingest(const IngestOpts& opt) {
  const std::vector<Article> articles = load_articles(opt.articles);
  std::size_t sentence_count = 0;
  std::size_t token_count = 0;
  std::size_t max_words = 0;
  std::vector<std::vector<Sentence>> all_sentences;
  all_sentences.reserve(articles.size());
  for (const Article& article : articles) {
    all_sentences.push_back(split_sentences(article));
    for (const Sentence& s : all_sentences.back()) {
      ++sentence_count;
      token_count += s.tokens.size();
      max_words = std::max(max_words, s.tokens.size());
    }
  }
  std::cout << "articles\t" << articles.size() << "\n";
  std::cout << "sentences\t" << sentence_count << "\n";
  std::cout << "max_sentence_words\t" << max_words << "\n";
  std::cout << "tokens\t" << token_count << "\n";

  if (!opt.si_labels.empty()) {
    const auto annotations = load_annotations(opt.si_labels, AnnotationKind::SI);
    check_references(articles, annotations, opt.si_labels);
    check_offsets(articles, annotations, opt.si_labels);
    const auto grouped = spans_by_article(annotations);
    std::size_t positive = 0;
    for (std::size_t a = 0; a < articles.size(); ++a) {
      const auto it = grouped.find(articles[a].id);
      if (it == grouped.end()) continue;
      for (const Sentence& sentence : all_sentences[a])
        for (const Token& token : sentence.tokens)
          for (const CharSpan& span : it->second)
            if (overlap_length(token.span, span) > 0) {
              ++positive;
              break;
            }
    }
    std::cout << "si_spans\t" << annotations.size() << "\n";
    const double fraction =
        token_count == 0 ? 0.0 : static_cast<double>(positive) / static_cast<double>(token_count);
    std::cout << "positive_token_fraction\t" << format_metric(fraction) << "\n";
  }

  if (!opt.tc_labels.empty()) {
    const auto annotations = load_annotations(opt.tc_labels, AnnotationKind::TC);
    check_references(articles, annotations, opt.tc_labels);
    check_offsets(articles, annotations, opt.tc_labels);
    const LabelInventory inventory = build_label_inventory(annotations);
    std::cout << "tc_pairs\t" << annotations.size() << "\n";
    std::cout << "techniques\t" << inventory.size() << "\n";
  }
}

struct EncodeTagsOpts {
  std::string articles;
  std::string labels;
  std::string scheme = "BIOE";
  std::string out;
};

void run_encode_tags(const EncodeTagsOpts& opt) {
  const Scheme scheme = scheme_from_name(opt.scheme);
  const std::vector<Article> articles = load_articles(opt.articles);
  const auto annotations = load_annotations_auto(opt.labels);
  check_references(articles, annotations, opt.labels);
  const auto grouped = spans_by_article(annotations);

  std::string out;
  for (const Article& article : articles) {
    const auto it = grouped.find(article.id);
    static const std::vector<CharSpan> no_spans;
    const std::vector<CharSpan>& spans = it == grouped.end() ? no_spans : it->second;
    for (const Sentence& sentence : split_sentences(article)) {
      std::vector<TokenRange> ranges;
      for (const CharSpan& span : spans) {
        const TokenRange range = snap_span(span, sentence.tokens);
        if (!range.empty()) ranges.push_back(range);
      }
      out += format_tags(encode_tags(scheme, sentence.tokens.size(), std::move(ranges)));
      out += '\n';
    }
  }
  write_file_atomic(opt.out, out);

  Manifest manifest("encode-tags");
  manifest.set("articles", opt.articles);
  manifest.set("labels", opt.labels);
  manifest.set("scheme", opt.scheme);
  manifest.set("out", opt.out);
  manifest.input_dir(opt.articles);
  manifest.input_file(opt.labels);
  manifest.write_for(opt.out);
}

struct DecodeTagsOpts {
  std::string articles;
  std::string tags;
  std::string scheme = "BIOE";
  std::string out;
};

void run_decode_tags(const DecodeTagsOpts& opt) {
  const Scheme scheme = scheme_from_name(opt.scheme);
  const std::vector<Article> articles = load_articles(opt.articles);
  const std::string text = read_file(opt.tags);

  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  const std::string_view view(text);
  while (pos < view.size()) {
    std::size_t nl = view.find('\n', pos);
    if (nl == std::string_view::npos) nl = view.size();
    lines.push_back(view.substr(pos, nl - pos));
    pos = nl + 1;
  }

  std::vector<SpanAnnotation> decoded;
  std::size_t line_index = 0;
  for (const Article& article : articles) {
    for (const Sentence& sentence : split_sentences(article)) {
      if (line_index >= lines.size())
        throw DataError(opt.tags + ": ran out of tag lines at sentence " +
                        std::to_string(line_index + 1));
      TagSequence tags;
      try {
        tags = parse_tags(lines[line_index], scheme);
      } catch (const DataError& e) {
        throw DataError(opt.tags + ":line " + std::to_string(line_index + 1) + ": " + e.what());
      }
      ++line_index;
      if (tags.size() != sentence.tokens.size())
        throw DataError(opt.tags + ":line " + std::to_string(line_index) + ": " +
                        std::to_string(tags.size()) + " labels for " +
                        std::to_string(sentence.tokens.size()) + " tokens (article " + article.id +
                        ")");
      for (const CharSpan& span : decode_tags(tags, sentence.tokens))
        decoded.push_back(SpanAnnotation{article.id, span, std::nullopt});
    }
  }
  if (line_index != lines.size())
    throw DataError(opt.tags + ": " + std::to_string(lines.size() - line_index) +
                    " extra tag lines beyond the corpus");
  write_file_atomic(opt.out, write_annotations(decoded, AnnotationKind::SI));

  Manifest manifest("decode-tags");
  manifest.set("articles", opt.articles);
  manifest.set("tags", opt.tags);
  manifest.set("scheme", opt.scheme);
  manifest.set("out", opt.out);
  manifest.input_dir(opt.articles);
  manifest.input_file(opt.tags);
  manifest.write_for(opt.out);
}

struct ConvertTagsOpts {
  std::string from;
  std::string to;
  std::string in;
  std::string out;
};

void run_convert_tags(const ConvertTagsOpts& opt) {
  const Scheme from = scheme_from_name(opt.from);
  const Scheme to = scheme_from_name(opt.to);
  std::string text;
  if (opt.in.empty()) {
    std::ostringstream buf;
    buf << std::cin.rdbuf();
    text = buf.str();
  } else {
    text = read_file(opt.in);
  }

  std::string out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  const std::string_view view(text);
  while (pos < view.size()) {
    std::size_t nl = view.find('\n', pos);
    if (nl == std::string_view::npos) nl = view.size();
    const std::string_view line = view.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    try {
      out += format_tags(convert_tags(parse_tags(line, from), to));
    } catch (const DataError& e) {
      const std::string source = opt.in.empty() ? "<stdin>" : opt.in;
      throw DataError(source + ":line " + std::to_string(line_no) + ": " + e.what());
    }
    out += '\n';
  }

  if (opt.out.empty()) {
    std::cout << out;
  } else {
    write_file_atomic(opt.out, out);
    Manifest manifest("convert-tags");
    manifest.set("from", opt.from);
    manifest.set("to", opt.to);
    if (!opt.in.empty()) manifest.set("in", opt.in);
    manifest.set("out", opt.out);
    if (!opt.in.empty()) manifest.input_file(opt.in);
    manifest.write_for(opt.out);
  }
}

struct ScoreSiOpts {
  std::string pred;
  std::string gold;
  std::string out;
  std::string per_article;
};

void run_score_si(const ScoreSiOpts& opt) {
  const auto pred = load_annotations(opt.pred, AnnotationKind::SI);
  const auto gold = load_annotations(opt.gold, AnnotationKind::SI);
  const SiScore score = score_si(pred, gold);

  std::string report;
  report += "precision\t" + format_metric(score.precision) + "\n";
  report += "recall\t" + format_metric(score.recall) + "\n";
  report += "f1\t" + format_metric(score.f1) + "\n";
  std::cout << report;

  if (!opt.out.empty()) {
    write_file_atomic(opt.out, report);
    Manifest manifest("score-si");
    manifest.set("pred", opt.pred);
    manifest.set("gold", opt.gold);
    manifest.set("out", opt.out);
    if (!opt.per_article.empty()) manifest.set("per-article", opt.per_article);
    manifest.input_file(opt.pred);
    manifest.input_file(opt.gold);
    manifest.write_for(opt.out);
  }
  if (!opt.per_article.empty()) {
    std::string rows = "article\tprecision\trecall\tf1\n";
    for (const auto& [id, prf] : score.per_article)
      rows += id + "\t" + format_metric(prf.precision) + "\t" + format_metric(prf.recall) + "\t" +
              format_metric(prf.f1) + "\n";
    write_file_atomic(opt.per_article, rows);
  }
}

struct ScoreTcOpts {
  std::string pred;
  std::string gold;
  std::string out;
  std::string per_class;
};

void run_score_tc(const ScoreTcOpts& opt) {
  const auto pred = load_annotations(opt.pred, AnnotationKind::TC);
  const auto gold = load_annotations(opt.gold, AnnotationKind::TC);
  const TcScore score = score_tc(pred, gold);

  const std::string report = "micro_f1\t" + format_metric(score.micro_f1) + "\n";
  std::cout << report;

  if (!opt.out.empty()) {
    write_file_atomic(opt.out, report);
    Manifest manifest("score-tc");
    manifest.set("pred", opt.pred);
    manifest.set("gold", opt.gold);
    manifest.set("out", opt.out);
    if (!opt.per_class.empty()) manifest.set("per-class", opt.per_class);
    manifest.input_file(opt.pred);
    manifest.input_file(opt.gold);
    manifest.write_for(opt.out);
  }
  if (!opt.per_class.empty()) {
    std::string rows = "class\tprecision\trecall\tf1\tsupport\n";
    for (const auto& [name, cs] : score.per_class)
      rows += name + "\t" + format_metric(cs.precision) + "\t" + format_metric(cs.recall) + "\t" +
              format_metric(cs.f1) + "\t" + std::to_string(cs.support) + "\n";
    write_file_atomic(opt.per_class, rows);
  }
}

struct ExtractContextOpts {
  std::string articles;
  std::string labels;
  std::string kind = "SENTENCE";
  std::size_t cap = 130;
  bool cap_excludes_fragment = false;
  std::string out;
};

void run_extract_context(const ExtractContextOpts& opt) {
  const ContextKind kind = context_kind_from_name(opt.kind);
  const std::vector<Article> articles = load_articles(opt.articles);
  const auto annotations = load_annotations_auto(opt.labels);
  check_references(articles, annotations, opt.labels);
  check_offsets(articles, annotations, opt.labels);
  ContextOptions options;
  options.cap_words = opt.cap;
  options.cap_includes_fragment = !opt.cap_excludes_fragment;
  const auto pairs = build_tc_dataset(articles, annotations, kind, options);
  write_file_atomic(opt.out, write_context_pairs(pairs));

  Manifest manifest("extract-context");
  manifest.set("articles", opt.articles);
  manifest.set("labels", opt.labels);
  manifest.set("kind", opt.kind);
  manifest.set("cap", opt.cap);
  manifest.set_flag("cap-excludes-fragment", opt.cap_excludes_fragment);
  manifest.set("out", opt.out);
  manifest.input_dir(opt.articles);
  manifest.input_file(opt.labels);
  manifest.write_for(opt.out);
}

struct TrainCommonOpts {
  std::string articles;
  std::string labels;
  std::string model;
  std::string dev_list;
  std::size_t dim = 256;
  double lr = 0.1;
  std::size_t epochs = 20;
  std::size_t batch = 8;
  std::uint64_t seed = 42;
  double split = 0.9;
  bool weighted = false;
};

TrainConfig to_train_config(const TrainCommonOpts& opt) {
  TrainConfig config;
  config.dim = opt.dim;
  config.learning_rate = opt.lr;
  config.epochs = opt.epochs;
  config.batch_size = opt.batch;
  config.seed = opt.seed;
  config.class_weighting = opt.weighted;
  return config;
}

void add_train_common(CLI::App* sub, TrainCommonOpts& opt) {
  sub->add_option("--articles", opt.articles, "Directory of article .txt files")->required();
  sub->add_option("--labels", opt.labels, "Gold label TSV")->required();
  sub->add_option("--model", opt.model, "Output model file")->required();
  sub->add_option("--dev-list", opt.dev_list, "Write held-out article ids to this file");
  sub->add_option("--dim", opt.dim, "Hashed feature dimension")->check(CLI::PositiveNumber);
  sub->add_option("--lr", opt.lr, "Learning rate")->check(CLI::PositiveNumber);
  sub->add_option("--epochs", opt.epochs, "Training epochs")->check(CLI::PositiveNumber);
  sub->add_option("--batch", opt.batch, "Mini-batch size")->check(CLI::PositiveNumber);
  sub->add_option("--seed", opt.seed, "Random seed")->envname("SPANTAG_SEED");
  sub->add_option("--split", opt.split, "Training fraction of articles")
      ->check(CLI::Range(1e-9, 1.0));
  sub->add_flag("--weighted", opt.weighted, "Inverse-frequency class weighting");
}

void manifest_train_common(Manifest& manifest, const TrainCommonOpts& opt) {
  manifest.set("articles", opt.articles);
  manifest.set("labels", opt.labels);
  manifest.set("model", opt.model);
  if (!opt.dev_list.empty()) manifest.set("dev-list", opt.dev_list);
  manifest.set("dim", opt.dim);
  manifest.set("lr", opt.lr);
  manifest.set("epochs", opt.epochs);
  manifest.set("batch", opt.batch);
  manifest.set("seed", opt.seed);
  manifest.set("split", opt.split);
  manifest.set_flag("weighted", opt.weighted);
}

void write_dev_list(const std::string& path, std::span<const std::string> dev_ids) {
  if (path.empty()) return;
  std::string out;
  for (const std::string& id : dev_ids) out += id + "\n";
  write_file_atomic(path, out);
}

struct TrainSiOpts {
  TrainCommonOpts common;
  std::string scheme = "BIOE";
};

void run_train_si(const TrainSiOpts& opt) {
  const Scheme scheme = scheme_from_name(opt.scheme);
  const std::vector<Article> articles = load_articles(opt.common.articles);
  const auto annotations = load_annotations(opt.common.labels, AnnotationKind::SI);
  check_references(articles, annotations, opt.common.labels);
  check_offsets(articles, annotations, opt.common.labels);

  const auto [train_ids, dev_ids] =
      split_train_dev(article_ids(articles), opt.common.split, opt.common.seed);
  const std::set<std::string> train_set(train_ids.begin(), train_ids.end());
  const auto grouped = spans_by_article(annotations);

  std::vector<TaggedSentence> sentences;
  for (const Article& article : articles) {
    if (!train_set.contains(article.id)) continue;
    const auto it = grouped.find(article.id);
    static const std::vector<CharSpan> no_spans;
    const std::vector<CharSpan>& spans = it == grouped.end() ? no_spans : it->second;
    for (Sentence& sentence : split_sentences(article)) {
      std::vector<TokenRange> ranges;
      for (const CharSpan& span : spans) {
        const TokenRange range = snap_span(span, sentence.tokens);
        if (!range.empty()) ranges.push_back(range);
      }
      TaggedSentence tagged;
      tagged.tags = encode_tags(scheme, sentence.tokens.size(), std::move(ranges));
      tagged.tokens = std::move(sentence.tokens);
      sentences.push_back(std::move(tagged));
    }
  }

  const TaggerTrainResult result = train_si(sentences, scheme, to_train_config(opt.common));
  write_file_atomic(opt.common.model, write_tagger(result.model));
  write_dev_list(opt.common.dev_list, dev_ids);

  Manifest manifest("train-si");
  manifest.set("scheme", opt.scheme);
  manifest_train_common(manifest, opt.common);
  manifest.input_dir(opt.common.articles);
  manifest.input_file(opt.common.labels);
  manifest.write_for(opt.common.model);

  std::cout << "train_articles\t" << train_ids.size() << "\n";
  std::cout << "dev_articles\t" << dev_ids.size() << "\n";
  std::cout << "train_sentences\t" << sentences.size() << "\n";
  std::cout << "final_epoch_loss\t" << format_metric(result.epoch_loss.back()) << "\n";
}

struct PredictSiOpts {
  std::string articles;
  std::string model;
  std::string out;
  std::string ids;
};

void run_predict_si(const PredictSiOpts& opt) {
  const TaggerModel model = parse_tagger(read_file(opt.model), opt.model);
  std::vector<Article> articles = load_articles(opt.articles);
  if (!opt.ids.empty()) {
    std::set<std::string> keep;
    std::istringstream in(read_file(opt.ids));
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) keep.insert(line);
    }
    std::erase_if(articles, [&](const Article& a) { return !keep.contains(a.id); });
    if (articles.size() != keep.size())
      throw DataError(opt.ids + ": some listed ids are missing from " + opt.articles);
  }

  std::vector<SpanAnnotation> predictions;
  for (const Article& article : articles) {
    const auto spans = predict_si(model, article);
    predictions.insert(predictions.end(), spans.begin(), spans.end());
  }
  write_file_atomic(opt.out, write_annotations(predictions, AnnotationKind::SI));

  Manifest manifest("predict-si");
  manifest.set("articles", opt.articles);
  manifest.set("model", opt.model);
  manifest.set("out", opt.out);
  if (!opt.ids.empty()) manifest.set("ids", opt.ids);
  manifest.input_dir(opt.articles);
  manifest.input_file(opt.model);
  if (!opt.ids.empty()) manifest.input_file(opt.ids);
  manifest.write_for(opt.out);

  std::cout << "articles\t" << articles.size() << "\n";
  std::cout << "predicted_spans\t" << predictions.size() << "\n";
}

struct TrainTcOpts {
  TrainCommonOpts common;
  std::string strategy = "NONE";
  double alpha = 0.5;
  std::size_t hidden_dim = 64;
  std::string kind = "NONE";
  std::size_t cap = 130;
  bool cap_excludes_fragment = false;
  bool length_feature = false;
  std::string vectors;
};

void run_train_tc(const TrainTcOpts& opt) {
  CombinationStrategy strategy;
  strategy.kind = combine_kind_from_name(opt.strategy);
  strategy.alpha = opt.alpha;
  strategy.hidden_dim = opt.hidden_dim;
  const ContextKind kind = context_kind_from_name(opt.kind);

  const std::vector<Article> articles = load_articles(opt.common.articles);
  const auto annotations = load_annotations(opt.common.labels, AnnotationKind::TC);
  check_references(articles, annotations, opt.common.labels);
  check_offsets(articles, annotations, opt.common.labels);

  const auto [train_ids, dev_ids] =
      split_train_dev(article_ids(articles), opt.common.split, opt.common.seed);
  const std::set<std::string> train_set(train_ids.begin(), train_ids.end());
  const auto train_annotations = filter_by_ids(annotations, train_set);
  if (train_annotations.empty())
    throw DataError("the train split contains no labeled pairs; lower --split or check labels");

  ContextOptions options;
  options.cap_words = opt.cap;
  options.cap_includes_fragment = !opt.cap_excludes_fragment;
  const auto pairs = build_tc_dataset(articles, train_annotations, kind, options);

  const SequenceEncoder encoder = make_encoder(opt.common.dim, opt.vectors);
  ClassifierTrainResult result =
      train_tc(pairs, strategy, to_train_config(opt.common), encoder, opt.length_feature);
  result.model.context_kind = kind;
  result.model.context_cap = opt.cap;
  result.model.cap_includes_fragment = options.cap_includes_fragment;
  write_file_atomic(opt.common.model, write_classifier(result.model));
  write_dev_list(opt.common.dev_list, dev_ids);

  Manifest manifest("train-tc");
  manifest.set("strategy", opt.strategy);
  manifest.set("alpha", opt.alpha);
  manifest.set("hidden-dim", opt.hidden_dim);
  manifest.set("kind", opt.kind);
  manifest.set("cap", opt.cap);
  manifest.set_flag("cap-excludes-fragment", opt.cap_excludes_fragment);
  manifest.set_flag("length-feature", opt.length_feature);
  if (!opt.vectors.empty()) manifest.set("vectors", opt.vectors);
  manifest_train_common(manifest, opt.common);
  manifest.input_dir(opt.common.articles);
  manifest.input_file(opt.common.labels);
  if (!opt.vectors.empty()) manifest.input_file(opt.vectors);
  manifest.write_for(opt.common.model);

  std::cout << "train_articles\t" << train_ids.size() << "\n";
  std::cout << "dev_articles\t" << dev_ids.size() << "\n";
  std::cout << "train_pairs\t" << pairs.size() << "\n";
  std::cout << "classes\t" << result.model.class_count() << "\n";
  std::cout << "final_epoch_loss\t" << format_metric(result.epoch_loss.back()) << "\n";
}

struct PredictTcOpts {
  std::string articles;
  std::string spans;
  std::string model;
  std::string out;
  std::string vectors;
};

void run_predict_tc(const PredictTcOpts& opt) {
  const ClassifierModel model = parse_classifier(read_file(opt.model), opt.model);
  const std::vector<Article> articles = load_articles(opt.articles);
  const auto annotations = load_annotations_auto(opt.spans);
  check_references(articles, annotations, opt.spans);
  check_offsets(articles, annotations, opt.spans);

  ContextOptions options;
  options.cap_words = model.context_cap;
  options.cap_includes_fragment = model.cap_includes_fragment;
  const auto pairs = build_tc_dataset(articles, annotations, model.context_kind, options);
  const SequenceEncoder encoder = make_encoder(model.config.dim, opt.vectors);

  std::vector<SpanAnnotation> predictions;
  predictions.reserve(pairs.size());
  for (const ContextPair& pair : pairs) {
    const TcPrediction prediction = predict_tc(model, pair, encoder);
    predictions.push_back(SpanAnnotation{pair.article_id, pair.span, prediction.technique});
  }
  write_file_atomic(opt.out, write_annotations(predictions, AnnotationKind::TC));

  Manifest manifest("predict-tc");
  manifest.set("articles", opt.articles);
  manifest.set("spans", opt.spans);
  manifest.set("model", opt.model);
  manifest.set("out", opt.out);
  if (!opt.vectors.empty()) manifest.set("vectors", opt.vectors);
  manifest.input_dir(opt.articles);
  manifest.input_file(opt.spans);
  manifest.input_file(opt.model);
  if (!opt.vectors.empty()) manifest.input_file(opt.vectors);
  manifest.write_for(opt.out);

  std::cout << "predicted_pairs\t" << predictions.size() << "\n";
}

struct StatsOpts {
  std::string articles;
  std::string tc_labels;
  std::string si_labels;
  std::string pred;
  std::string out_dir;
  std::string unit = "CHARS";
  std::size_t bin_width = 0;
};

void run_stats(const StatsOpts& opt) {
  const std::vector<Article> articles = load_articles(opt.articles);
  const auto tc = load_annotations(opt.tc_labels, AnnotationKind::TC);
  check_references(articles, tc, opt.tc_labels);
  check_offsets(articles, tc, opt.tc_labels);
  LengthUnit unit;
  if (opt.unit == "CHARS")
    unit = LengthUnit::Chars;
  else if (opt.unit == "WORDS")
    unit = LengthUnit::Words;
  else
    throw DataError("unknown length unit: " + opt.unit);

  const fs::path dir(opt.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);

  std::string class_rows;
  for (const auto& [name, count] : class_histogram(tc))
    class_rows += name + "\t" + std::to_string(count) + "\n";
  write_file_atomic(dir / "class_counts.tsv", class_rows);

  const auto by_technique =
      span_length_distribution(tc, articles, unit, LengthGrouping::Technique, opt.bin_width);
  write_file_atomic(dir / "span_length_by_technique.csv", histogram_csv(by_technique));
  const auto by_category =
      span_length_distribution(tc, articles, unit, LengthGrouping::Category, opt.bin_width);
  write_file_atomic(dir / "span_length_by_category.csv", histogram_csv(by_category));

  std::vector<CharSpan> tc_spans;
  for (const SpanAnnotation& ann : tc) tc_spans.push_back(ann.span);
  std::string summary;
  summary += "tc_pairs\t" + std::to_string(tc.size()) + "\n";
  summary += "techniques\t" + std::to_string(build_label_inventory(tc).size()) + "\n";
  summary += "average_tc_span_length_chars\t" + format_metric(average_span_length(tc_spans)) + "\n";

  if (!opt.si_labels.empty()) {
    const auto si = load_annotations(opt.si_labels, AnnotationKind::SI);
    check_references(articles, si, opt.si_labels);
    std::vector<CharSpan> spans;
    for (const SpanAnnotation& ann : si) spans.push_back(ann.span);
    summary += "si_spans\t" + std::to_string(si.size()) + "\n";
    summary += "average_si_span_length_chars\t" + format_metric(average_span_length(spans)) + "\n";
  }
  if (!opt.pred.empty()) {
    const auto pred = load_annotations(opt.pred, AnnotationKind::SI);
    std::vector<CharSpan> spans;
    for (const SpanAnnotation& ann : pred) spans.push_back(ann.span);
    summary += "pred_spans\t" + std::to_string(pred.size()) + "\n";
    summary +=
        "average_pred_span_length_chars\t" + format_metric(average_span_length(spans)) + "\n";
  }
  write_file_atomic(dir / "summary.tsv", summary);

  Manifest manifest("stats");
  manifest.set("articles", opt.articles);
  manifest.set("tc-labels", opt.tc_labels);
  if (!opt.si_labels.empty()) manifest.set("si-labels", opt.si_labels);
  if (!opt.pred.empty()) manifest.set("pred", opt.pred);
  manifest.set("out-dir", opt.out_dir);
  manifest.set("unit", opt.unit);
  manifest.set("bin-width", opt.bin_width);
  manifest.input_dir(opt.articles);
  manifest.input_file(opt.tc_labels);
  if (!opt.si_labels.empty()) manifest.input_file(opt.si_labels);
  if (!opt.pred.empty()) manifest.input_file(opt.pred);
  write_file_atomic(dir / "manifest", manifest.str());

  std::cout << "stats written to " << dir.string() << "\n";
}

void finish_options(CLI::App* sub) {
  sub->add_option("--config", "Flat key=value config file; explicit flags override it");
}

void configure(CLI::App& app) {
  app.require_subcommand(1);

  {
    auto opt = std::make_shared<IngestOpts>();
    CLI::App* sub = app.add_subcommand("ingest", "Validate a corpus and print its statistics");
    finish_options(sub);
    sub->add_option("--articles", opt->articles, "Directory of article .txt files")->required();
    sub->add_option("--si-labels", opt->si_labels, "Span identification gold TSV");
    sub->add_option("--tc-labels", opt->tc_labels, "Technique classification gold TSV");
    sub->callback([opt] { run_ingest(*opt); });
  }
  {
    auto opt = std::make_shared<EncodeTagsOpts>();
    CLI::App* sub = app.add_subcommand("encode-tags", "Character spans -> per-token tag lines");
    finish_options(sub);
    sub->add_option("--articles", opt->articles, "Directory of article .txt files")->required();
    sub->add_option("--labels", opt->labels, "Gold span TSV")->required();
    sub->add_option("--scheme", opt->scheme, "Tagging scheme")
        ->check(CLI::IsMember({"PNP", "BIO", "BIOE", "BIOES"}));
    sub->add_option("--out", opt->out, "Output tag file")->required();
    sub->callback([opt] { run_encode_tags(*opt); });
  }
  {
    auto opt = std::make_shared<DecodeTagsOpts>();
    CLI::App* sub = app.add_subcommand("decode-tags", "Per-token tag lines -> character spans");
    finish_options(sub);
    sub->add_option("--articles", opt->articles, "Directory of article .txt files")->required();
    sub->add_option("--tags", opt->tags, "Tag file, one sentence per line")->required();
    sub->add_option("--scheme", opt->scheme, "Tagging scheme")
        ->check(CLI::IsMember({"PNP", "BIO", "BIOE", "BIOES"}));
    sub->add_option("--out", opt->out, "Output SI TSV")->required();
    sub->callback([opt] { run_decode_tags(*opt); });
  }
  {
    auto opt = std::make_shared<ConvertTagsOpts>();
    CLI::App* sub = app.add_subcommand("convert-tags", "Re-encode tag lines under another scheme");
    finish_options(sub);
    sub->add_option("--from", opt->from, "Source scheme")
        ->required()
        ->check(CLI::IsMember({"PNP", "BIO", "BIOE", "BIOES"}));
    sub->add_option("--to", opt->to, "Target scheme")
        ->required()
        ->check(CLI::IsMember({"PNP", "BIO", "BIOE", "BIOES"}));
    sub->add_option("--in", opt->in, "Input file (default stdin)");
    sub->add_option("--out", opt->out, "Output file (default stdout)");
    sub->callback([opt] { run_convert_tags(*opt); });
  }
  {
    auto opt = std::make_shared<ScoreSiOpts>();
    CLI::App* sub = app.add_subcommand("score-si", "Overlap precision/recall/F1 for SI");
    finish_options(sub);
    sub->add_option("--pred", opt->pred, "Predicted spans TSV")->required();
    sub->add_option("--gold", opt->gold, "Gold spans TSV")->required();
    sub->add_option("--out", opt->out, "Also write the metric TSV here");
    sub->add_option("--per-article", opt->per_article, "Write per-article scores here");
    sub->callback([opt] { run_score_si(*opt); });
  }
  {
    auto opt = std::make_shared<ScoreTcOpts>();
    CLI::App* sub = app.add_subcommand("score-tc", "Micro-averaged F1 for TC");
    finish_options(sub);
    sub->add_option("--pred", opt->pred, "Predicted labels TSV")->required();
    sub->add_option("--gold", opt->gold, "Gold labels TSV")->required();
    sub->add_option("--out", opt->out, "Also write the metric TSV here");
    sub->add_option("--per-class", opt->per_class, "Write per-class scores here");
    sub->callback([opt] { run_score_tc(*opt); });
  }
  {
    auto opt = std::make_shared<ExtractContextOpts>();
    CLI::App* sub = app.add_subcommand("extract-context", "Build (fragment, context) pairs");
    finish_options(sub);
    sub->add_option("--articles", opt->articles, "Directory of article .txt files")->required();
    sub->add_option("--labels", opt->labels, "Span TSV (SI or TC format)")->required();
    sub->add_option("--kind", opt->kind, "Context kind")
        ->check(CLI::IsMember({"NONE", "SENTENCE", "TITLE"}));
    sub->add_option("--cap", opt->cap, "Sentence context word cap")->check(CLI::PositiveNumber);
    sub->add_flag("--cap-excludes-fragment", opt->cap_excludes_fragment,
                  "Do not count fragment words against the cap");
    sub->add_option("--out", opt->out, "Output pair TSV")->required();
    sub->callback([opt] { run_extract_context(*opt); });
  }
  {
    auto opt = std::make_shared<TrainSiOpts>();
    CLI::App* sub = app.add_subcommand("train-si", "Train the span identification tagger");
    finish_options(sub);
    sub->add_option("--scheme", opt->scheme, "Tagging scheme")
        ->check(CLI::IsMember({"PNP", "BIO", "BIOE", "BIOES"}));
    add_train_common(sub, opt->common);
    sub->callback([opt] { run_train_si(*opt); });
  }
  {
    auto opt = std::make_shared<PredictSiOpts>();
    CLI::App* sub = app.add_subcommand("predict-si", "Predict propaganda spans");
    finish_options(sub);
    sub->add_option("--articles", opt->articles, "Directory of article .txt files")->required();
    sub->add_option("--model", opt->model, "Trained tagger model")->required();
    sub->add_option("--out", opt->out, "Output SI TSV")->required();
    sub->add_option("--ids", opt->ids, "Only predict the article ids listed in this file");
    sub->callback([opt] { run_predict_si(*opt); });
  }
  {
    auto opt = std::make_shared<TrainTcOpts>();
    CLI::App* sub = app.add_subcommand("train-tc", "Train the technique classifier");
    finish_options(sub);
    sub->add_option("--strategy", opt->strategy, "Context combination strategy")
        ->check(CLI::IsMember({"NONE", "CONCAT_TEXT", "CONCAT_EMBED", "CONCAT_EMBED_HIDDEN", "ADD",
                               "WEIGHTED_AVG"}));
    sub->add_option("--alpha", opt->alpha, "Weighted-average alpha")->check(CLI::Range(0.0, 1.0));
    sub->add_option("--hidden-dim", opt->hidden_dim, "Context hidden layer width")
        ->check(CLI::PositiveNumber);
    sub->add_option("--kind", opt->kind, "Context kind")
        ->check(CLI::IsMember({"NONE", "SENTENCE", "TITLE"}));
    sub->add_option("--cap", opt->cap, "Sentence context word cap")->check(CLI::PositiveNumber);
    sub->add_flag("--cap-excludes-fragment", opt->cap_excludes_fragment,
                  "Do not count fragment words against the cap");
    sub->add_flag("--length-feature", opt->length_feature,
                  "Append the normalized fragment length to the features");
    sub->add_option("--vectors", opt->vectors, "Precomputed vector TSV overriding the encoder");
    add_train_common(sub, opt->common);
    sub->callback([opt] { run_train_tc(*opt); });
  }
  {
    auto opt = std::make_shared<PredictTcOpts>();
    CLI::App* sub = app.add_subcommand("predict-tc", "Classify propaganda techniques");
    finish_options(sub);
    sub->add_option("--articles", opt->articles, "Directory of article .txt files")->required();
    sub->add_option("--spans", opt->spans, "Spans to classify (SI or TC TSV)")->required();
    sub->add_option("--model", opt->model, "Trained classifier model")->required();
    sub->add_option("--out", opt->out, "Output TC TSV")->required();
    sub->add_option("--vectors", opt->vectors, "Precomputed vector TSV overriding the encoder");
    sub->callback([opt] { run_predict_tc(*opt); });
  }
  {
    auto opt = std::make_shared<StatsOpts>();
    CLI::App* sub = app.add_subcommand("stats", "Dataset analytics CSVs");
    finish_options(sub);
    sub->add_option("--articles", opt->articles, "Directory of article .txt files")->required();
    sub->add_option("--tc-labels", opt->tc_labels, "Technique classification gold TSV")->required();
    sub->add_option("--si-labels", opt->si_labels, "Span identification gold TSV");
    sub->add_option("--pred", opt->pred, "Predicted spans TSV for length reporting");
    sub->add_option("--out-dir", opt->out_dir, "Output directory")->required();
    sub->add_option("--unit", opt->unit, "Span length unit")
        ->check(CLI::IsMember({"CHARS", "WORDS"}));
    sub->add_option("--bin-width", opt->bin_width, "Histogram bin width (0 = default)");
    sub->callback([opt] { run_stats(*opt); });
  }

  // Config values are injected as leading --key=value tokens; TakeLast lets
  // explicit flags override them.
  for (CLI::App* sub : app.get_subcommands([](CLI::App*) { return true; }))
    for (CLI::Option* option : sub->get_options())
      option->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"spantag: propaganda span identification and technique classification toolkit"};
  configure(app);
  try {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    args = expand_config(args);
    std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e);
    return 0;
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("spantag");
  for (const std::string& arg : args) argv.push_back(arg.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace spantag::cli
