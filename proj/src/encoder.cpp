#include "spantag/encoder.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <stdexcept>

#include "spantag/errors.hpp"
#include "spantag/tokenizer.hpp"
#include "spantag/unicode.hpp"

namespace spantag {

PositionBucket position_bucket(std::size_t index, std::size_t token_count) {
  if (index == 0) return PositionBucket::Begin;
  if (index + 1 >= token_count) return PositionBucket::End;
  return PositionBucket::Middle;
}

namespace {

std::string_view bucket_name(PositionBucket bucket) {
  switch (bucket) {
    case PositionBucket::Begin:
      return "begin";
    case PositionBucket::Middle:
      return "middle";
    case PositionBucket::End:
      return "end";
  }
  throw std::invalid_argument("unknown position bucket");
}

bool ascii_upper(char32_t c) { return c >= U'A' && c <= U'Z'; }
bool ascii_lower(char32_t c) { return c >= U'a' && c <= U'z'; }
bool ascii_digit(char32_t c) { return c >= U'0' && c <= U'9'; }
bool is_letter(char32_t c) { return ascii_upper(c) || ascii_lower(c) || c >= 0x80; }

std::string_view shape_class(const std::u32string& chars) {
  bool all_digit = true, any_alnum = false, any_letter = false, all_upper = true;
  for (char32_t c : chars) {
    if (!ascii_digit(c)) all_digit = false;
    if (ascii_digit(c) || is_letter(c)) any_alnum = true;
    if (is_letter(c)) {
      any_letter = true;
      if (!ascii_upper(c)) all_upper = false;
    }
  }
  if (all_digit) return "Digit";
  if (!any_alnum) return "Punct";
  if (any_letter && all_upper) return "AllCaps";
  if (ascii_upper(chars.front())) return "Cap";
  return "Other";
}

std::u32string lower_ascii(const std::u32string& chars) {
  std::u32string out = chars;
  for (char32_t& c : out)
    if (ascii_upper(c)) c = c - U'A' + U'a';
  return out;
}

}  // namespace

std::vector<std::string> featurize_token(std::string_view token_text, PositionBucket bucket) {
  if (token_text.empty()) return {};
  const std::u32string chars = decode_utf8(token_text);
  const std::u32string lower = lower_ascii(chars);
  const std::string lower8 = encode_utf8(lower);

  std::set<std::string> features;
  features.insert("lower=" + lower8);
  features.insert("shape=" + std::string(shape_class(chars)));
  features.insert("pos=" + std::string(bucket_name(bucket)));

  std::u32string padded;
  padded.reserve(lower.size() + 2);
  padded += U'^';
  padded += lower;
  padded += U'$';
  for (std::size_t i = 0; i + 3 <= padded.size(); ++i)
    features.insert("tri=" + encode_utf8(padded.substr(i, 3)));

  for (std::size_t len = 1; len <= 3 && len <= lower.size(); ++len) {
    features.insert("pre" + std::to_string(len) + "=" + encode_utf8(lower.substr(0, len)));
    features.insert("suf" + std::to_string(len) + "=" +
                    encode_utf8(lower.substr(lower.size() - len, len)));
  }
  return {features.begin(), features.end()};
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char b : bytes) {
    hash ^= b;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::size_t hash_feature(std::string_view feature, std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("feature dimension must be positive");
  return static_cast<std::size_t>(fnv1a64(feature) % dim);
}

std::vector<std::size_t> token_feature_indices(std::string_view token_text, PositionBucket bucket,
                                               std::size_t dim) {
  std::set<std::size_t> indices;
  for (const std::string& feature : featurize_token(token_text, bucket))
    indices.insert(hash_feature(feature, dim));
  return {indices.begin(), indices.end()};
}

std::vector<double> token_feature_vector(std::string_view token_text, PositionBucket bucket,
                                         std::size_t dim) {
  std::vector<double> vec(dim, 0.0);
  for (std::size_t idx : token_feature_indices(token_text, bucket, dim)) vec[idx] = 1.0;
  return vec;
}

std::vector<double> encode_sequence(std::string_view text, std::size_t dim) {
  if (dim == 0) throw std::invalid_argument("encoder dimension must be positive");
  std::vector<double> sum(dim, 0.0);
  const std::vector<Token> tokens = tokenize(text, 0);
  if (tokens.empty()) return sum;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const PositionBucket bucket = position_bucket(i, tokens.size());
    for (std::size_t idx : token_feature_indices(tokens[i].text, bucket, dim)) sum[idx] += 1.0;
  }
  const double inv_n = 1.0 / static_cast<double>(tokens.size());
  double norm_sq = 0.0;
  for (double& v : sum) {
    v *= inv_n;
    norm_sq += v * v;
  }
  const double norm = std::sqrt(norm_sq);
  if (norm > 0.0)
    for (double& v : sum) v /= norm;
  return sum;
}

std::string_view combine_kind_name(CombineKind kind) {
  switch (kind) {
    case CombineKind::NONE:
      return "NONE";
    case CombineKind::CONCAT_TEXT:
      return "CONCAT_TEXT";
    case CombineKind::CONCAT_EMBED:
      return "CONCAT_EMBED";
    case CombineKind::CONCAT_EMBED_HIDDEN:
      return "CONCAT_EMBED_HIDDEN";
    case CombineKind::ADD:
      return "ADD";
    case CombineKind::WEIGHTED_AVG:
      return "WEIGHTED_AVG";
  }
  throw std::invalid_argument("unknown combination kind");
}

CombineKind combine_kind_from_name(std::string_view name) {
  if (name == "NONE") return CombineKind::NONE;
  if (name == "CONCAT_TEXT") return CombineKind::CONCAT_TEXT;
  if (name == "CONCAT_EMBED") return CombineKind::CONCAT_EMBED;
  if (name == "CONCAT_EMBED_HIDDEN") return CombineKind::CONCAT_EMBED_HIDDEN;
  if (name == "ADD") return CombineKind::ADD;
  if (name == "WEIGHTED_AVG") return CombineKind::WEIGHTED_AVG;
  throw DataError("unknown combination strategy: '" + std::string(name) + "'");
}

std::vector<double> hidden_forward(const HiddenLayer& layer, std::span<const double> input) {
  if (input.size() != layer.in_dim || layer.weights.size() != layer.in_dim * layer.out_dim ||
      layer.bias.size() != layer.out_dim)
    throw std::invalid_argument("hidden layer dimensions do not match input");
  std::vector<double> out(layer.out_dim, 0.0);
  for (std::size_t r = 0; r < layer.out_dim; ++r) {
    double acc = layer.bias[r];
    const double* row = layer.weights.data() + r * layer.in_dim;
    for (std::size_t k = 0; k < layer.in_dim; ++k) acc += row[k] * input[k];
    out[r] = std::tanh(acc);
  }
  return out;
}

std::size_t combined_dim(const CombinationStrategy& strategy, std::size_t dim) {
  switch (strategy.kind) {
    case CombineKind::NONE:
    case CombineKind::CONCAT_TEXT:
    case CombineKind::ADD:
    case CombineKind::WEIGHTED_AVG:
      return dim;
    case CombineKind::CONCAT_EMBED:
      return 2 * dim;
    case CombineKind::CONCAT_EMBED_HIDDEN:
      return dim + strategy.hidden_dim;
  }
  throw std::invalid_argument("unknown combination kind");
}

std::vector<double> combine(std::span<const double> s, std::span<const double> c,
                            const CombinationStrategy& strategy, const HiddenLayer* hidden) {
  if (strategy.kind == CombineKind::CONCAT_TEXT)
    throw std::invalid_argument("CONCAT_TEXT combines texts before encoding, not vectors");
  if (strategy.kind != CombineKind::NONE && s.size() != c.size())
    throw std::invalid_argument("S and C dimensions differ: " + std::to_string(s.size()) + " vs " +
                                std::to_string(c.size()));
  switch (strategy.kind) {
    case CombineKind::NONE:
      return {s.begin(), s.end()};
    case CombineKind::CONCAT_EMBED: {
      std::vector<double> v(s.begin(), s.end());
      v.insert(v.end(), c.begin(), c.end());
      return v;
    }
    case CombineKind::CONCAT_EMBED_HIDDEN: {
      if (hidden == nullptr)
        throw std::invalid_argument("CONCAT_EMBED_HIDDEN requires a hidden layer");
      if (hidden->out_dim != strategy.hidden_dim)
        throw std::invalid_argument("hidden layer output dimension mismatch");
      std::vector<double> v(s.begin(), s.end());
      const std::vector<double> reduced = hidden_forward(*hidden, c);
      v.insert(v.end(), reduced.begin(), reduced.end());
      return v;
    }
    case CombineKind::ADD: {
      std::vector<double> v(s.begin(), s.end());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] += c[i];
      return v;
    }
    case CombineKind::WEIGHTED_AVG: {
      if (!(strategy.alpha >= 0.0 && strategy.alpha <= 1.0))
        throw std::invalid_argument("alpha must lie in [0, 1]");
      std::vector<double> v(s.size());
      for (std::size_t i = 0; i < v.size(); ++i)
        v[i] = strategy.alpha * s[i] + (1.0 - strategy.alpha) * c[i];
      return v;
    }
    default:
      throw std::invalid_argument("unknown combination kind");
  }
}

std::string span_key(const std::string& article_id, CharSpan span) {
  return article_id + ":" + std::to_string(span.begin) + ":" + std::to_string(span.end);
}

std::string title_key(const std::string& article_id) { return article_id + ":TITLE"; }

VectorStore VectorStore::parse_tsv(std::string_view tsv_text, std::string_view source) {
  VectorStore store;
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
    if (line.empty()) throw DataError(where + ": empty vector row");
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
    if (fields.size() < 2) throw DataError(where + ": expected a key and at least one float");
    std::vector<double> values;
    values.reserve(fields.size() - 1);
    for (std::size_t i = 1; i < fields.size(); ++i) {
      double v = 0.0;
      const auto [ptr, err] = std::from_chars(fields[i].data(), fields[i].data() + fields[i].size(), v);
      if (err != std::errc() || ptr != fields[i].data() + fields[i].size())
        throw DataError(where + ": bad float '" + std::string(fields[i]) + "'");
      values.push_back(v);
    }
    if (store.dim_ == 0)
      store.dim_ = values.size();
    else if (values.size() != store.dim_)
      throw DataError(where + ": vector has " + std::to_string(values.size()) +
                      " components, expected " + std::to_string(store.dim_));
    const std::string key(fields[0]);
    if (!store.vectors_.emplace(key, std::move(values)).second)
      throw DataError(where + ": duplicate key '" + key + "'");
  }
  return store;
}

const std::vector<double>* VectorStore::lookup(const std::string& key) const {
  const auto it = vectors_.find(key);
  return it == vectors_.end() ? nullptr : &it->second;
}

SequenceEncoder::SequenceEncoder(std::size_t dim, VectorStore overrides)
    : dim_(dim), overrides_(std::move(overrides)) {
  if (dim_ == 0) throw std::invalid_argument("encoder dimension must be positive");
  if (!overrides_.empty() && overrides_.dim() != dim_)
    throw DataError("override vectors have dimension " + std::to_string(overrides_.dim()) +
                    ", encoder expects " + std::to_string(dim_));
}

std::vector<double> SequenceEncoder::encode_text(std::string_view text) const {
  return encode_sequence(text, dim_);
}

std::vector<double> SequenceEncoder::encode_keyed(const std::string& key,
                                                  std::string_view text) const {
  if (const std::vector<double>* v = overrides_.lookup(key)) return *v;
  return encode_text(text);
}

}  // namespace spantag
