#include "spantag/models.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "spantag/errors.hpp"
#include "spantag/random.hpp"

namespace spantag {

std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw std::invalid_argument("softmax of an empty vector");
  const double max_logit = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - max_logit);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

namespace detail {

double length_feature_value(CharSpan span) {
  return std::min(1.0, static_cast<double>(span.length()) / 1000.0);
}

LossGrad tagger_loss_grad(std::span<const double> weights, std::span<const double> bias,
                          std::size_t label_count, std::size_t dim,
                          std::span<const SparseExample> batch,
                          std::span<const double> class_weights) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  LossGrad lg;
  lg.grad_weights.assign(weights.size(), 0.0);
  lg.grad_bias.assign(bias.size(), 0.0);
  std::vector<double> logits(label_count);
  for (const SparseExample& ex : batch) {
    for (std::size_t k = 0; k < label_count; ++k) {
      double acc = bias[k];
      const double* row = weights.data() + k * dim;
      for (std::size_t idx : ex.features) acc += row[idx];
      logits[k] = acc;
    }
    const std::vector<double> probs = softmax(logits);
    const double w = class_weights.empty() ? 1.0 : class_weights[ex.label];
    lg.loss += -w * std::log(std::max(probs[ex.label], 1e-300));
    for (std::size_t k = 0; k < label_count; ++k) {
      const double delta = w * (probs[k] - (k == ex.label ? 1.0 : 0.0));
      lg.grad_bias[k] += delta;
      double* grow = lg.grad_weights.data() + k * dim;
      for (std::size_t idx : ex.features) grow[idx] += delta;
    }
  }
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  lg.loss *= inv_b;
  for (double& g : lg.grad_weights) g *= inv_b;
  for (double& g : lg.grad_bias) g *= inv_b;
  return lg;
}

namespace {

// Composes the classifier input V from pre-encoded S/C parts.
std::vector<double> compose_features(const DenseExample& ex, const CombinationStrategy& strategy,
                                     const std::optional<HiddenLayer>& hidden, bool length_feature,
                                     std::vector<double>* hidden_out) {
  std::vector<double> v;
  switch (strategy.kind) {
    case CombineKind::NONE:
    case CombineKind::CONCAT_TEXT:
      v = ex.s;
      break;
    case CombineKind::CONCAT_EMBED_HIDDEN: {
      if (!hidden) throw std::invalid_argument("CONCAT_EMBED_HIDDEN requires a hidden layer");
      v = ex.s;
      const std::vector<double> h = hidden_forward(*hidden, ex.c);
      if (hidden_out) *hidden_out = h;
      v.insert(v.end(), h.begin(), h.end());
      break;
    }
    default:
      v = combine(ex.s, ex.c, strategy);
      break;
  }
  if (length_feature) v.push_back(ex.length);
  return v;
}

}  // namespace

ClassifierLossGrad classifier_loss_grad(const ClassifierParams& params,
                                        const CombinationStrategy& strategy, bool length_feature,
                                        std::size_t class_count, std::size_t feature_dim,
                                        std::span<const DenseExample> batch,
                                        std::span<const double> class_weights) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  ClassifierLossGrad lg;
  lg.grad_weights.assign(params.weights.size(), 0.0);
  lg.grad_bias.assign(params.bias.size(), 0.0);
  if (params.hidden) {
    lg.grad_hidden_weights.assign(params.hidden->weights.size(), 0.0);
    lg.grad_hidden_bias.assign(params.hidden->bias.size(), 0.0);
  }

  const bool with_hidden = strategy.kind == CombineKind::CONCAT_EMBED_HIDDEN;
  std::vector<double> logits(class_count);
  std::vector<double> h;
  for (const DenseExample& ex : batch) {
    const std::vector<double> v =
        compose_features(ex, strategy, params.hidden, length_feature, with_hidden ? &h : nullptr);
    if (v.size() != feature_dim)
      throw std::invalid_argument("feature vector has dimension " + std::to_string(v.size()) +
                                  ", expected " + std::to_string(feature_dim));
    for (std::size_t k = 0; k < class_count; ++k) {
      double acc = params.bias[k];
      const double* row = params.weights.data() + k * feature_dim;
      for (std::size_t i = 0; i < feature_dim; ++i) acc += row[i] * v[i];
      logits[k] = acc;
    }
    const std::vector<double> probs = softmax(logits);
    const double w = class_weights.empty() ? 1.0 : class_weights[ex.label];
    lg.loss += -w * std::log(std::max(probs[ex.label], 1e-300));

    for (std::size_t k = 0; k < class_count; ++k) {
      const double delta = w * (probs[k] - (k == ex.label ? 1.0 : 0.0));
      lg.grad_bias[k] += delta;
      double* grow = lg.grad_weights.data() + k * feature_dim;
      for (std::size_t i = 0; i < feature_dim; ++i) grow[i] += delta * v[i];
    }

    if (with_hidden && params.hidden) {
      const HiddenLayer& layer = *params.hidden;
      const std::size_t s_dim = ex.s.size();
      for (std::size_t r = 0; r < layer.out_dim; ++r) {
        double gh = 0.0;
        for (std::size_t k = 0; k < class_count; ++k) {
          const double delta = w * (probs[k] - (k == ex.label ? 1.0 : 0.0));
          gh += delta * params.weights[k * feature_dim + s_dim + r];
        }
        const double pre = gh * (1.0 - h[r] * h[r]);
        lg.grad_hidden_bias[r] += pre;
        double* grow = lg.grad_hidden_weights.data() + r * layer.in_dim;
        for (std::size_t i = 0; i < layer.in_dim; ++i) grow[i] += pre * ex.c[i];
      }
    }
  }

  const double inv_b = 1.0 / static_cast<double>(batch.size());
  lg.loss *= inv_b;
  for (double& g : lg.grad_weights) g *= inv_b;
  for (double& g : lg.grad_bias) g *= inv_b;
  for (double& g : lg.grad_hidden_weights) g *= inv_b;
  for (double& g : lg.grad_hidden_bias) g *= inv_b;
  return lg;
}

}  // namespace detail

namespace {

std::vector<double> class_weight_table(std::span<const std::size_t> labels, std::size_t class_count,
                                       bool enabled) {
  if (!enabled) return {};
  std::vector<std::size_t> counts(class_count, 0);
  for (std::size_t y : labels) counts[y] += 1;
  std::vector<double> weights(class_count, 1.0);
  const double n = static_cast<double>(labels.size());
  const double k = static_cast<double>(class_count);
  for (std::size_t c = 0; c < class_count; ++c)
    if (counts[c] > 0) weights[c] = n / (k * static_cast<double>(counts[c]));
  return weights;
}

void check_train_config(const TrainConfig& config) {
  if (config.dim == 0) throw std::invalid_argument("dimension must be positive");
  if (!(config.learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (config.epochs == 0) throw std::invalid_argument("epochs must be at least 1");
  if (config.batch_size == 0) throw std::invalid_argument("batch size must be at least 1");
}

}  // namespace

TaggerTrainResult train_si(std::span<const TaggedSentence> sentences, Scheme scheme,
                           const TrainConfig& config) {
  check_train_config(config);
  if (sentences.empty()) throw DataError("cannot train a tagger on an empty corpus");

  std::vector<detail::SparseExample> examples;
  for (const TaggedSentence& sentence : sentences) {
    if (sentence.tags.scheme != scheme)
      throw DataError("sentence tagged with scheme " +
                      std::string(scheme_name(sentence.tags.scheme)) + ", training expects " +
                      std::string(scheme_name(scheme)));
    if (sentence.tags.labels.size() != sentence.tokens.size())
      throw DataError("tag sequence length does not match token count");
    for (std::size_t i = 0; i < sentence.tokens.size(); ++i) {
      detail::SparseExample ex;
      ex.features = token_feature_indices(sentence.tokens[i].text,
                                          position_bucket(i, sentence.tokens.size()), config.dim);
      ex.label = scheme_label_index(scheme, sentence.tags.labels[i]);
      examples.push_back(std::move(ex));
    }
  }
  if (examples.empty()) throw DataError("training corpus contains no tokens");

  const std::size_t label_count = scheme_label_count(scheme);
  TaggerTrainResult result;
  result.model.scheme = scheme;
  result.model.config = config;
  result.model.weights.assign(label_count * config.dim, 0.0);
  result.model.bias.assign(label_count, 0.0);

  std::vector<std::size_t> labels(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) labels[i] = examples[i].label;
  const std::vector<double> class_weights =
      class_weight_table(labels, label_count, config.class_weighting);

  SeededRng rng(config.seed);
  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::vector<detail::SparseExample> batch;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t i = start; i < stop; ++i) batch.push_back(examples[order[i]]);
      const detail::LossGrad lg =
          detail::tagger_loss_grad(result.model.weights, result.model.bias, label_count, config.dim,
                                   batch, class_weights);
      loss_sum += lg.loss * static_cast<double>(batch.size());
      for (std::size_t i = 0; i < result.model.weights.size(); ++i)
        result.model.weights[i] -= config.learning_rate * lg.grad_weights[i];
      for (std::size_t i = 0; i < result.model.bias.size(); ++i)
        result.model.bias[i] -= config.learning_rate * lg.grad_bias[i];
    }
    result.epoch_loss.push_back(loss_sum / static_cast<double>(examples.size()));
  }
  return result;
}

namespace {

// Argmax with ties broken toward O, then by label letter.
Tag pick_tag(Scheme scheme, std::span<const double> logits) {
  const auto alphabet = scheme_alphabet(scheme);
  const double best = *std::max_element(logits.begin(), logits.end());
  Tag chosen = Tag::O;
  bool have = false;
  char chosen_letter = 0;
  for (std::size_t k = 0; k < alphabet.size(); ++k) {
    if (logits[k] != best) continue;
    if (alphabet[k] == Tag::O) return Tag::O;
    const char letter = tag_letter(alphabet[k]);
    if (!have || letter < chosen_letter) {
      chosen = alphabet[k];
      chosen_letter = letter;
      have = true;
    }
  }
  return chosen;
}

}  // namespace

TagSequence predict_tags(const TaggerModel& model, std::span<const Token> tokens) {
  const std::size_t label_count = model.label_count();
  const std::size_t dim = model.config.dim;
  if (model.weights.size() != label_count * dim || model.bias.size() != label_count)
    throw std::invalid_argument("tagger parameters do not match its configuration");
  std::vector<Tag> labels;
  labels.reserve(tokens.size());
  std::vector<double> logits(label_count);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const auto features =
        token_feature_indices(tokens[i].text, position_bucket(i, tokens.size()), dim);
    for (std::size_t k = 0; k < label_count; ++k) {
      double acc = model.bias[k];
      const double* row = model.weights.data() + k * dim;
      for (std::size_t idx : features) acc += row[idx];
      logits[k] = acc;
    }
    labels.push_back(pick_tag(model.scheme, logits));
  }
  return TagSequence{model.scheme, std::move(labels)};
}

std::vector<SpanAnnotation> predict_si(const TaggerModel& model, const Article& article) {
  std::vector<SpanAnnotation> spans;
  for (const Sentence& sentence : split_sentences(article)) {
    const TagSequence tags = predict_tags(model, sentence.tokens);
    for (const CharSpan& span : decode_tags(tags, sentence.tokens))
      spans.push_back(SpanAnnotation{article.id, span, std::nullopt});
  }
  return spans;
}

std::size_t ClassifierModel::feature_dim() const {
  return combined_dim(strategy, config.dim) + (length_feature ? 1 : 0);
}

namespace {

struct PairVectors {
  std::vector<double> s;
  std::vector<double> c;
  bool has_c = false;
};

PairVectors encode_pair(const ContextPair& pair, const CombinationStrategy& strategy,
                        const SequenceEncoder& encoder) {
  PairVectors out;
  if (strategy.kind == CombineKind::CONCAT_TEXT) {
    std::string text = pair.context_text;
    if (!text.empty() && !pair.fragment_text.empty()) text += ' ';
    text += pair.fragment_text;
    out.s = encoder.encode_text(text);
    return out;
  }
  out.s = encoder.encode_keyed(span_key(pair.article_id, pair.span), pair.fragment_text);
  if (strategy.kind == CombineKind::NONE) return out;
  out.has_c = true;
  switch (pair.kind) {
    case ContextKind::TITLE:
      out.c = encoder.encode_keyed(title_key(pair.article_id), pair.context_text);
      break;
    case ContextKind::SENTENCE:
      if (pair.context_span) {
        out.c = encoder.encode_keyed(span_key(pair.article_id, *pair.context_span),
                                     pair.context_text);
        break;
      }
      [[fallthrough]];
    case ContextKind::NONE:
      out.c = encoder.encode_text(pair.context_text);
      break;
  }
  return out;
}

}  // namespace

std::vector<double> build_feature_vector(const ContextPair& pair,
                                         const CombinationStrategy& strategy,
                                         const HiddenLayer* hidden, const SequenceEncoder& encoder,
                                         bool length_feature) {
  const PairVectors pv = encode_pair(pair, strategy, encoder);
  std::vector<double> v;
  switch (strategy.kind) {
    case CombineKind::NONE:
    case CombineKind::CONCAT_TEXT:
      v = pv.s;
      break;
    default:
      v = combine(pv.s, pv.c, strategy, hidden);
      break;
  }
  if (length_feature) v.push_back(detail::length_feature_value(pair.span));
  return v;
}

ClassifierTrainResult train_tc(std::span<const ContextPair> pairs,
                               const CombinationStrategy& strategy, const TrainConfig& config,
                               const SequenceEncoder& encoder, bool length_feature) {
  check_train_config(config);
  if (pairs.empty()) throw DataError("cannot train a classifier on no pairs");
  if (encoder.dim() != config.dim)
    throw std::invalid_argument("encoder dimension does not match training config");

  std::vector<SpanAnnotation> labeled;
  labeled.reserve(pairs.size());
  for (const ContextPair& pair : pairs) {
    if (!pair.technique)
      throw DataError("training pair for article " + pair.article_id + " has no technique label");
    labeled.push_back(SpanAnnotation{pair.article_id, pair.span, pair.technique});
  }
  const LabelInventory inventory = build_label_inventory(labeled);
  const std::size_t class_count = inventory.size();

  std::vector<detail::DenseExample> examples;
  examples.reserve(pairs.size());
  for (const ContextPair& pair : pairs) {
    detail::DenseExample ex;
    PairVectors pv = encode_pair(pair, strategy, encoder);
    ex.s = std::move(pv.s);
    if (pv.has_c) ex.c = std::move(pv.c);
    ex.length = detail::length_feature_value(pair.span);
    ex.label = inventory.index_of(*pair.technique);
    examples.push_back(std::move(ex));
  }

  ClassifierTrainResult result;
  ClassifierModel& model = result.model;
  model.labels = inventory;
  model.strategy = strategy;
  model.context_kind = pairs.front().kind;
  model.length_feature = length_feature;
  model.config = config;

  SeededRng rng(config.seed);
  if (strategy.kind == CombineKind::CONCAT_EMBED_HIDDEN) {
    if (strategy.hidden_dim == 0 || strategy.hidden_dim >= config.dim)
      throw std::invalid_argument("hidden dimension must lie in (0, dim)");
    HiddenLayer layer;
    layer.in_dim = config.dim;
    layer.out_dim = strategy.hidden_dim;
    layer.weights.resize(layer.in_dim * layer.out_dim);
    // Small nonzero init so the context path is trainable from the zero
    // classifier; the seed makes it reproducible.
    for (double& w : layer.weights) w = rng.uniform(-0.1, 0.1);
    layer.bias.assign(layer.out_dim, 0.0);
    model.hidden = std::move(layer);
  }

  const std::size_t feature_dim = model.feature_dim();
  model.weights.assign(class_count * feature_dim, 0.0);
  model.bias.assign(class_count, 0.0);

  std::vector<std::size_t> labels(examples.size());
  for (std::size_t i = 0; i < examples.size(); ++i) labels[i] = examples[i].label;
  const std::vector<double> class_weights =
      class_weight_table(labels, class_count, config.class_weighting);

  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  detail::ClassifierParams params;
  params.hidden = model.hidden;
  params.weights = model.weights;
  params.bias = model.bias;

  std::vector<detail::DenseExample> batch;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      batch.clear();
      for (std::size_t i = start; i < stop; ++i) batch.push_back(examples[order[i]]);
      const detail::ClassifierLossGrad lg = detail::classifier_loss_grad(
          params, strategy, length_feature, class_count, feature_dim, batch, class_weights);
      loss_sum += lg.loss * static_cast<double>(batch.size());
      for (std::size_t i = 0; i < params.weights.size(); ++i)
        params.weights[i] -= config.learning_rate * lg.grad_weights[i];
      for (std::size_t i = 0; i < params.bias.size(); ++i)
        params.bias[i] -= config.learning_rate * lg.grad_bias[i];
      if (params.hidden) {
        for (std::size_t i = 0; i < params.hidden->weights.size(); ++i)
          params.hidden->weights[i] -= config.learning_rate * lg.grad_hidden_weights[i];
        for (std::size_t i = 0; i < params.hidden->bias.size(); ++i)
          params.hidden->bias[i] -= config.learning_rate * lg.grad_hidden_bias[i];
      }
    }
    result.epoch_loss.push_back(loss_sum / static_cast<double>(examples.size()));
  }

  model.weights = std::move(params.weights);
  model.bias = std::move(params.bias);
  model.hidden = std::move(params.hidden);
  return result;
}

TcPrediction predict_tc(const ClassifierModel& model, const ContextPair& pair,
                        const SequenceEncoder& encoder) {
  if (encoder.dim() != model.config.dim)
    throw std::invalid_argument("encoder dimension does not match the model");
  const std::size_t feature_dim = model.feature_dim();
  const std::size_t class_count = model.class_count();
  if (model.weights.size() != class_count * feature_dim || model.bias.size() != class_count)
    throw std::invalid_argument("classifier parameters do not match its configuration");

  const std::vector<double> v =
      build_feature_vector(pair, model.strategy, model.hidden ? &*model.hidden : nullptr, encoder,
                           model.length_feature);
  std::vector<double> logits(class_count);
  for (std::size_t k = 0; k < class_count; ++k) {
    double acc = model.bias[k];
    const double* row = model.weights.data() + k * feature_dim;
    for (std::size_t i = 0; i < feature_dim; ++i) acc += row[i] * v[i];
    logits[k] = acc;
  }
  TcPrediction prediction;
  prediction.probabilities = softmax(logits);
  const double best =
      *std::max_element(prediction.probabilities.begin(), prediction.probabilities.end());
  for (std::size_t k = 0; k < class_count; ++k) {
    if (prediction.probabilities[k] == best) {
      prediction.class_index = k;
      break;
    }
  }
  prediction.technique = model.labels.names[prediction.class_index];
  return prediction;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void append_row(std::string& out, std::span<const double> row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i > 0) out += ' ';
    out += format_double(row[i]);
  }
  out += '\n';
}

class LineReader {
 public:
  LineReader(std::string_view text, std::string_view source) : text_(text), source_(source) {}

  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    std::size_t nl = text_.find('\n', pos_);
    if (nl == std::string_view::npos) nl = text_.size();
    line = text_.substr(pos_, nl - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = nl + 1;
    ++line_no_;
    return true;
  }

  std::string where() const {
    return (source_.empty() ? std::string("line ") : std::string(source_) + ":line ") +
           std::to_string(line_no_);
  }

 private:
  std::string_view text_;
  std::string_view source_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == ' ') {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ') ++j;
    out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::vector<double> parse_row(std::string_view line, std::size_t expect, const std::string& where) {
  const auto fields = split_ws(line);
  if (fields.size() != expect)
    throw DataError(where + ": expected " + std::to_string(expect) + " values, got " +
                    std::to_string(fields.size()));
  std::vector<double> row(fields.size());
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const auto [ptr, err] =
        std::from_chars(fields[i].data(), fields[i].data() + fields[i].size(), row[i]);
    if (err != std::errc() || ptr != fields[i].data() + fields[i].size())
      throw DataError(where + ": bad float '" + std::string(fields[i]) + "'");
  }
  return row;
}

std::map<std::string, std::string> parse_header_fields(std::span<const std::string_view> tokens,
                                                       const std::string& where) {
  std::map<std::string, std::string> fields;
  for (std::string_view tok : tokens) {
    const std::size_t eq = tok.find('=');
    if (eq == std::string_view::npos)
      throw DataError(where + ": bad header field '" + std::string(tok) + "'");
    fields[std::string(tok.substr(0, eq))] = std::string(tok.substr(eq + 1));
  }
  return fields;
}

const std::string& header_field(const std::map<std::string, std::string>& fields,
                                const std::string& key, const std::string& where) {
  const auto it = fields.find(key);
  if (it == fields.end()) throw DataError(where + ": missing header field '" + key + "'");
  return it->second;
}

template <typename T>
T parse_integer(const std::string& value, const std::string& where) {
  T out{};
  const auto [ptr, err] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (err != std::errc() || ptr != value.data() + value.size())
    throw DataError(where + ": bad integer '" + value + "'");
  return out;
}

double parse_double_field(const std::string& value, const std::string& where) {
  double out = 0.0;
  const auto [ptr, err] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (err != std::errc() || ptr != value.data() + value.size())
    throw DataError(where + ": bad float '" + value + "'");
  return out;
}

std::string train_config_header(const TrainConfig& config) {
  std::string out;
  out += " dim=" + std::to_string(config.dim);
  out += " lr=" + format_double(config.learning_rate);
  out += " epochs=" + std::to_string(config.epochs);
  out += " batch=" + std::to_string(config.batch_size);
  out += " seed=" + std::to_string(config.seed);
  out += " weighted=" + std::string(config.class_weighting ? "1" : "0");
  return out;
}

TrainConfig parse_train_config(const std::map<std::string, std::string>& fields,
                               const std::string& where) {
  TrainConfig config;
  config.dim = parse_integer<std::size_t>(header_field(fields, "dim", where), where);
  config.learning_rate = parse_double_field(header_field(fields, "lr", where), where);
  config.epochs = parse_integer<std::size_t>(header_field(fields, "epochs", where), where);
  config.batch_size = parse_integer<std::size_t>(header_field(fields, "batch", where), where);
  config.seed = parse_integer<std::uint64_t>(header_field(fields, "seed", where), where);
  config.class_weighting = header_field(fields, "weighted", where) == "1";
  return config;
}

}  // namespace

std::string write_tagger(const TaggerModel& model) {
  std::string out = "spantag-tagger 1 scheme=" + std::string(scheme_name(model.scheme));
  out += train_config_header(model.config);
  out += '\n';
  const std::size_t dim = model.config.dim;
  for (std::size_t k = 0; k < model.label_count(); ++k)
    append_row(out, std::span(model.weights).subspan(k * dim, dim));
  append_row(out, model.bias);
  return out;
}

TaggerModel parse_tagger(std::string_view text, std::string_view source) {
  LineReader reader(text, source);
  std::string_view line;
  if (!reader.next(line)) throw DataError("empty tagger model file");
  auto tokens = split_ws(line);
  if (tokens.size() < 2 || tokens[0] != "spantag-tagger" || tokens[1] != "1")
    throw DataError(reader.where() + ": not a spantag-tagger v1 file");
  const auto fields = parse_header_fields(std::span(tokens).subspan(2), reader.where());
  TaggerModel model;
  model.scheme = scheme_from_name(header_field(fields, "scheme", reader.where()));
  model.config = parse_train_config(fields, reader.where());

  const std::size_t label_count = model.label_count();
  model.weights.reserve(label_count * model.config.dim);
  for (std::size_t k = 0; k < label_count; ++k) {
    if (!reader.next(line)) throw DataError(reader.where() + ": missing weight row");
    const auto row = parse_row(line, model.config.dim, reader.where());
    model.weights.insert(model.weights.end(), row.begin(), row.end());
  }
  if (!reader.next(line)) throw DataError(reader.where() + ": missing bias row");
  model.bias = parse_row(line, label_count, reader.where());
  if (reader.next(line) && !line.empty())
    throw DataError(reader.where() + ": trailing content after model");
  return model;
}

std::string write_classifier(const ClassifierModel& model) {
  std::string out = "spantag-classifier 1";
  out += " strategy=" + std::string(combine_kind_name(model.strategy.kind));
  out += " alpha=" + format_double(model.strategy.alpha);
  out += " hidden_dim=" + std::to_string(model.strategy.hidden_dim);
  out += " kind=" + std::string(context_kind_name(model.context_kind));
  out += " cap=" + std::to_string(model.context_cap);
  out += " capfrag=" + std::string(model.cap_includes_fragment ? "1" : "0");
  out += " length=" + std::string(model.length_feature ? "1" : "0");
  out += " classes=" + std::to_string(model.class_count());
  out += train_config_header(model.config);
  out += '\n';
  out += "labels";
  for (const std::string& name : model.labels.names) {
    out += '\t';
    out += name;
  }
  out += '\n';
  if (model.hidden) {
    for (std::size_t r = 0; r < model.hidden->out_dim; ++r)
      append_row(out, std::span(model.hidden->weights).subspan(r * model.hidden->in_dim,
                                                               model.hidden->in_dim));
    append_row(out, model.hidden->bias);
  }
  const std::size_t feature_dim = model.feature_dim();
  for (std::size_t k = 0; k < model.class_count(); ++k)
    append_row(out, std::span(model.weights).subspan(k * feature_dim, feature_dim));
  append_row(out, model.bias);
  return out;
}

ClassifierModel parse_classifier(std::string_view text, std::string_view source) {
  LineReader reader(text, source);
  std::string_view line;
  if (!reader.next(line)) throw DataError("empty classifier model file");
  auto tokens = split_ws(line);
  if (tokens.size() < 2 || tokens[0] != "spantag-classifier" || tokens[1] != "1")
    throw DataError(reader.where() + ": not a spantag-classifier v1 file");
  const auto fields = parse_header_fields(std::span(tokens).subspan(2), reader.where());

  ClassifierModel model;
  model.strategy.kind = combine_kind_from_name(header_field(fields, "strategy", reader.where()));
  model.strategy.alpha = parse_double_field(header_field(fields, "alpha", reader.where()),
                                            reader.where());
  model.strategy.hidden_dim =
      parse_integer<std::size_t>(header_field(fields, "hidden_dim", reader.where()), reader.where());
  model.context_kind = context_kind_from_name(header_field(fields, "kind", reader.where()));
  model.context_cap =
      parse_integer<std::size_t>(header_field(fields, "cap", reader.where()), reader.where());
  model.cap_includes_fragment = header_field(fields, "capfrag", reader.where()) == "1";
  model.length_feature = header_field(fields, "length", reader.where()) == "1";
  const std::size_t class_count =
      parse_integer<std::size_t>(header_field(fields, "classes", reader.where()), reader.where());
  model.config = parse_train_config(fields, reader.where());

  if (!reader.next(line)) throw DataError(reader.where() + ": missing labels row");
  if (line.substr(0, 6) != "labels") throw DataError(reader.where() + ": expected labels row");
  std::string_view rest = line.substr(6);
  while (!rest.empty()) {
    if (rest.front() != '\t') throw DataError(reader.where() + ": malformed labels row");
    rest.remove_prefix(1);
    std::size_t tab = rest.find('\t');
    if (tab == std::string_view::npos) tab = rest.size();
    model.labels.names.emplace_back(rest.substr(0, tab));
    rest.remove_prefix(tab);
  }
  if (model.labels.size() != class_count)
    throw DataError(reader.where() + ": labels row has " + std::to_string(model.labels.size()) +
                    " names, header says " + std::to_string(class_count));
  if (!std::is_sorted(model.labels.names.begin(), model.labels.names.end()))
    throw DataError(reader.where() + ": label names are not sorted");

  if (model.strategy.kind == CombineKind::CONCAT_EMBED_HIDDEN) {
    HiddenLayer layer;
    layer.in_dim = model.config.dim;
    layer.out_dim = model.strategy.hidden_dim;
    layer.weights.reserve(layer.in_dim * layer.out_dim);
    for (std::size_t r = 0; r < layer.out_dim; ++r) {
      if (!reader.next(line)) throw DataError(reader.where() + ": missing hidden weight row");
      const auto row = parse_row(line, layer.in_dim, reader.where());
      layer.weights.insert(layer.weights.end(), row.begin(), row.end());
    }
    if (!reader.next(line)) throw DataError(reader.where() + ": missing hidden bias row");
    layer.bias = parse_row(line, layer.out_dim, reader.where());
    model.hidden = std::move(layer);
  }

  const std::size_t feature_dim = model.feature_dim();
  model.weights.reserve(class_count * feature_dim);
  for (std::size_t k = 0; k < class_count; ++k) {
    if (!reader.next(line)) throw DataError(reader.where() + ": missing weight row");
    const auto row = parse_row(line, feature_dim, reader.where());
    model.weights.insert(model.weights.end(), row.begin(), row.end());
  }
  if (!reader.next(line)) throw DataError(reader.where() + ": missing bias row");
  model.bias = parse_row(line, class_count, reader.where());
  if (reader.next(line) && !line.empty())
    throw DataError(reader.where() + ": trailing content after model");
  return model;
}

}  // namespace spantag
