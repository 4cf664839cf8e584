#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spantag/context.hpp"
#include "spantag/corpus.hpp"
#include "spantag/encoder.hpp"
#include "spantag/tagcodec.hpp"
#include "spantag/tokenizer.hpp"

namespace spantag {

struct TrainConfig {
  std::size_t dim = 256;
  double learning_rate = 0.1;
  std::size_t epochs = 20;
  std::size_t batch_size = 8;
  std::uint64_t seed = 42;
  // Optional inverse-frequency class weighting; off by default.
  bool class_weighting = false;
};

// Per-token tag classifier: multinomial logistic regression over hashed
// token features. Class order follows scheme_alphabet(scheme).
struct TaggerModel {
  Scheme scheme = Scheme::BIOE;
  TrainConfig config;
  std::vector<double> weights;  // label_count x dim, row-major
  std::vector<double> bias;     // label_count

  std::size_t label_count() const { return scheme_label_count(scheme); }
};

struct TaggerTrainResult {
  TaggerModel model;
  std::vector<double> epoch_loss;  // averaged cross-entropy per epoch
};

struct TaggedSentence {
  std::vector<Token> tokens;
  TagSequence tags;
};

// Deterministic mini-batch gradient descent from zero-initialized weights;
// the seed drives example shuffling. Identical inputs and config give
// bit-identical parameters.
TaggerTrainResult train_si(std::span<const TaggedSentence> sentences, Scheme scheme,
                           const TrainConfig& config);

// Per-token argmax with ties broken toward O, then by label letter.
TagSequence predict_tags(const TaggerModel& model, std::span<const Token> tokens);

/// Predicted spans of one article, sorted and disjoint.
std::vector<SpanAnnotation> predict_si(const TaggerModel& model, const Article& article);

// Technique classifier over the combined vector V. The model remembers how
// its features were built (strategy, context kind/cap, length feature) so
// prediction can rebuild them.
struct ClassifierModel {
  LabelInventory labels;
  CombinationStrategy strategy;
  ContextKind context_kind = ContextKind::NONE;
  std::size_t context_cap = 130;
  bool cap_includes_fragment = true;
  bool length_feature = false;
  TrainConfig config;
  std::optional<HiddenLayer> hidden;  // CONCAT_EMBED_HIDDEN only
  std::vector<double> weights;        // class_count x feature_dim, row-major
  std::vector<double> bias;           // class_count

  std::size_t class_count() const { return labels.size(); }
  std::size_t feature_dim() const;
};

struct ClassifierTrainResult {
  ClassifierModel model;
  std::vector<double> epoch_loss;
};

// Softmax regression over V built per strategy; the hidden layer (when
// present) is trained jointly from a small seeded-uniform init, all other
// parameters start at zero. Labels must be present on every pair.
ClassifierTrainResult train_tc(std::span<const ContextPair> pairs,
                               const CombinationStrategy& strategy, const TrainConfig& config,
                               const SequenceEncoder& encoder, bool length_feature = false);

struct TcPrediction {
  std::string technique;
  std::size_t class_index = 0;
  std::vector<double> probabilities;
};

// Argmax of the softmax; ties break toward the lowest class index.
TcPrediction predict_tc(const ClassifierModel& model, const ContextPair& pair,
                        const SequenceEncoder& encoder);

// The per-pair input vector V (plus the optional length feature), exactly as
// the classifier sees it.
std::vector<double> build_feature_vector(const ContextPair& pair,
                                         const CombinationStrategy& strategy,
                                         const HiddenLayer* hidden, const SequenceEncoder& encoder,
                                         bool length_feature);

// Model files: header line, then one row of space-separated decimals per
// weight row, 17 significant digits, exact round-trip.
std::string write_tagger(const TaggerModel& model);
TaggerModel parse_tagger(std::string_view text, std::string_view source = {});
std::string write_classifier(const ClassifierModel& model);
ClassifierModel parse_classifier(std::string_view text, std::string_view source = {});

/// Numerically stable softmax; output sums to 1.
std::vector<double> softmax(std::span<const double> logits);

// Internals exposed for gradient verification.
namespace detail {

struct SparseExample {
  std::vector<std::size_t> features;  // sorted unique indices into [0, dim)
  std::size_t label = 0;
};

struct LossGrad {
  double loss = 0.0;
  std::vector<double> grad_weights;
  std::vector<double> grad_bias;
};

// Averaged cross-entropy and its gradient over a batch for the tagger.
LossGrad tagger_loss_grad(std::span<const double> weights, std::span<const double> bias,
                          std::size_t label_count, std::size_t dim,
                          std::span<const SparseExample> batch,
                          std::span<const double> class_weights);

struct DenseExample {
  std::vector<double> s;
  std::vector<double> c;       // empty when the strategy ignores context
  double length = 0.0;         // normalized fragment length (when used)
  std::size_t label = 0;
};

struct ClassifierParams {
  std::optional<HiddenLayer> hidden;
  std::vector<double> weights;
  std::vector<double> bias;
};

struct ClassifierLossGrad {
  double loss = 0.0;
  std::vector<double> grad_weights;
  std::vector<double> grad_bias;
  std::vector<double> grad_hidden_weights;
  std::vector<double> grad_hidden_bias;
};

ClassifierLossGrad classifier_loss_grad(const ClassifierParams& params,
                                        const CombinationStrategy& strategy, bool length_feature,
                                        std::size_t class_count, std::size_t feature_dim,
                                        std::span<const DenseExample> batch,
                                        std::span<const double> class_weights);

/// Normalized fragment length feature: characters / 1000, clamped to [0, 1].
double length_feature_value(CharSpan span);

}  // namespace detail

}  // namespace spantag
