#include "spantag/models.hpp"

#include <cmath>

#include "doctest.h"
#include "spantag/errors.hpp"
#include "spantag/random.hpp"
#include "spantag/scorer.hpp"
#include "synthetic.hpp"

using namespace spantag;

namespace {

TrainConfig small_config() {
  TrainConfig config;
  config.dim = 128;
  config.epochs = 5;
  config.seed = 7;
  return config;
}

}  // namespace

TEST_CASE("train_si is deterministic under a fixed seed") {
  const auto corpus = testsupport::make_synthetic_si(3, 10);
  const auto sentences = corpus.tagged(Scheme::BIOE);
  const TrainConfig config = small_config();
  const TaggerTrainResult a = train_si(sentences, Scheme::BIOE, config);
  const TaggerTrainResult b = train_si(sentences, Scheme::BIOE, config);
  CHECK(a.model.weights == b.model.weights);
  CHECK(a.model.bias == b.model.bias);
  CHECK(a.epoch_loss == b.epoch_loss);

  TrainConfig other_seed = config;
  other_seed.seed = 8;
  const TaggerTrainResult c = train_si(sentences, Scheme::BIOE, other_seed);
  CHECK(a.model.weights != c.model.weights);  // shuffling differs
}

TEST_CASE("train_si input validation") {
  CHECK_THROWS_AS(train_si({}, Scheme::BIOE, small_config()), DataError);
  const auto corpus = testsupport::make_synthetic_si(3, 4);
  const auto sentences = corpus.tagged(Scheme::BIO);
  CHECK_THROWS_AS(train_si(sentences, Scheme::BIOE, small_config()), DataError);
}

TEST_CASE("per-epoch loss is finite and does not increase early at small lr") {
  const auto corpus = testsupport::make_synthetic_si(5, 30);
  TrainConfig config = small_config();
  config.learning_rate = 0.01;
  config.epochs = 2;
  const TaggerTrainResult result = train_si(corpus.tagged(Scheme::BIOE), Scheme::BIOE, config);
  REQUIRE(result.epoch_loss.size() == 2);
  for (double loss : result.epoch_loss) CHECK(std::isfinite(loss));
  CHECK(result.epoch_loss[1] <= result.epoch_loss[0]);
}

TEST_CASE("a zero-weight tagger predicts no spans") {
  TaggerModel model;
  model.scheme = Scheme::BIOE;
  model.config = small_config();
  model.weights.assign(model.label_count() * model.config.dim, 0.0);
  model.bias.assign(model.label_count(), 0.0);
  const Article article = make_article("1", "The dictator will destroy us\n");
  CHECK(predict_si(model, article).empty());
  CHECK(predict_si(model, make_article("2", "")).empty());
}

TEST_CASE("hand-set weights pick out exactly one token span") {
  const Article article = make_article("1", "The dictator will destroy us all\n");
  const auto sentences = split_sentences(article);
  REQUIRE(sentences.size() == 1);
  const auto& tokens = sentences[0].tokens;

  TaggerModel model;
  model.scheme = Scheme::PNP;
  model.config = small_config();
  const std::size_t dim = model.config.dim;
  model.weights.assign(model.label_count() * dim, 0.0);
  model.bias.assign(model.label_count(), 0.0);

  // Find a hashed feature unique to "dictator" among these tokens.
  const auto target = token_feature_indices("dictator", position_bucket(1, tokens.size()), dim);
  std::size_t unique_index = dim;
  for (std::size_t candidate : target) {
    bool clash = false;
    for (std::size_t i = 0; i < tokens.size() && !clash; ++i) {
      if (tokens[i].text == "dictator") continue;
      const auto other = token_feature_indices(tokens[i].text, position_bucket(i, tokens.size()), dim);
      clash = std::find(other.begin(), other.end(), candidate) != other.end();
    }
    if (!clash) {
      unique_index = candidate;
      break;
    }
  }
  REQUIRE(unique_index < dim);

  const std::size_t p_row = scheme_label_index(Scheme::PNP, Tag::P);
  model.weights[p_row * dim + unique_index] = 1.0;  // P logit +1 on "dictator", 0 elsewhere

  const auto spans = predict_si(model, article);
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].span == CharSpan{4, 12});
  CHECK(slice(article, spans[0].span) == "dictator");
}

TEST_CASE("two-class synthetic classifier reaches training accuracy 1.0") {
  const auto pairs = testsupport::make_synthetic_tc(17, 40, 2);
  TrainConfig config;
  config.dim = 128;
  config.epochs = 50;
  config.seed = 5;
  const SequenceEncoder encoder(config.dim);
  const CombinationStrategy strategy{CombineKind::NONE};
  const ClassifierTrainResult result = train_tc(pairs, strategy, config, encoder);
  std::size_t correct = 0;
  for (const ContextPair& pair : pairs)
    if (predict_tc(result.model, pair, encoder).technique == *pair.technique) ++correct;
  CHECK(correct == pairs.size());
  for (double loss : result.epoch_loss) CHECK(std::isfinite(loss));
}

TEST_CASE("train_tc determinism and validation") {
  const auto pairs = testsupport::make_synthetic_tc(19, 20, 3);
  TrainConfig config = small_config();
  const SequenceEncoder encoder(config.dim);
  const CombinationStrategy strategy{CombineKind::CONCAT_EMBED};
  const auto a = train_tc(pairs, strategy, config, encoder);
  const auto b = train_tc(pairs, strategy, config, encoder);
  CHECK(a.model.weights == b.model.weights);
  CHECK(a.model.bias == b.model.bias);

  CHECK_THROWS_AS(train_tc({}, strategy, config, encoder), DataError);
  auto unlabeled = pairs;
  unlabeled[0].technique.reset();
  CHECK_THROWS_AS(train_tc(unlabeled, strategy, config, encoder), DataError);
}

TEST_CASE("weighted average with alpha 1 is observationally NONE") {
  const auto pairs = testsupport::make_synthetic_tc(23, 50, 2);
  TrainConfig config = small_config();
  config.epochs = 10;
  const SequenceEncoder encoder(config.dim);

  for (const ContextPair& pair : pairs) {
    const auto v_none = build_feature_vector(pair, {CombineKind::NONE}, nullptr, encoder, false);
    const auto v_wavg = build_feature_vector(pair, {CombineKind::WEIGHTED_AVG, 1.0, 0}, nullptr,
                                             encoder, false);
    CHECK(v_none == v_wavg);
  }

  const auto none = train_tc(pairs, {CombineKind::NONE}, config, encoder);
  const auto wavg = train_tc(pairs, {CombineKind::WEIGHTED_AVG, 1.0, 0}, config, encoder);
  CHECK(none.model.weights == wavg.model.weights);
  CHECK(none.model.bias == wavg.model.bias);
  CHECK(none.epoch_loss == wavg.epoch_loss);
  for (const ContextPair& pair : pairs) {
    const auto p_none = predict_tc(none.model, pair, encoder);
    const auto p_wavg = predict_tc(wavg.model, pair, encoder);
    CHECK(p_none.technique == p_wavg.technique);
    CHECK(p_none.probabilities == p_wavg.probabilities);
  }
}

TEST_CASE("a zero-weight classifier is uniform and picks class 0") {
  ClassifierModel model;
  model.labels.names = {"A", "B", "C"};
  model.strategy = {CombineKind::NONE};
  model.config = small_config();
  model.weights.assign(3 * model.feature_dim(), 0.0);
  model.bias.assign(3, 0.0);
  const SequenceEncoder encoder(model.config.dim);
  ContextPair pair;
  pair.article_id = "1";
  pair.span = {0, 4};
  pair.fragment_text = "text";
  const TcPrediction prediction = predict_tc(model, pair, encoder);
  CHECK(prediction.class_index == 0);
  CHECK(prediction.technique == "A");
  for (double p : prediction.probabilities)
    CHECK(p == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("softmax probabilities always sum to 1") {
  SeededRng rng(29);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t k = 2 + rng.below(6);
    std::vector<double> logits;
    for (std::size_t i = 0; i < k; ++i) logits.push_back(rng.uniform(-30.0, 30.0));
    const auto probs = softmax(logits);
    double sum = 0.0;
    for (double p : probs) {
      CHECK(p >= 0.0);
      sum += p;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-9);
  }
}

TEST_CASE("hand-set classifier weights favor the loaded class") {
  const SequenceEncoder encoder(64);
  ContextPair pair;
  pair.article_id = "1";
  pair.span = {0, 5};
  pair.fragment_text = "zebra";

  ClassifierModel model;
  model.labels.names = {"A", "B"};
  model.strategy = {CombineKind::NONE};
  model.config.dim = 64;
  const auto v = encoder.encode_text("zebra");
  model.weights.assign(2 * 64, 0.0);
  for (std::size_t i = 0; i < 64; ++i) model.weights[1 * 64 + i] = v[i];  // logit_B = |v|^2 = 1
  model.bias.assign(2, 0.0);

  const TcPrediction prediction = predict_tc(model, pair, encoder);
  CHECK(prediction.technique == "B");
  CHECK(prediction.probabilities[1] > prediction.probabilities[0]);
}

TEST_CASE("tagger model file round-trips exactly") {
  const auto corpus = testsupport::make_synthetic_si(31, 8);
  const TaggerTrainResult result = train_si(corpus.tagged(Scheme::BIOES), Scheme::BIOES,
                                            small_config());
  const std::string text = write_tagger(result.model);
  const TaggerModel reread = parse_tagger(text);
  CHECK(reread.scheme == result.model.scheme);
  CHECK(reread.config.dim == result.model.config.dim);
  CHECK(reread.config.seed == result.model.config.seed);
  CHECK(reread.weights == result.model.weights);
  CHECK(reread.bias == result.model.bias);
  CHECK(write_tagger(reread) == text);

  CHECK_THROWS_AS(parse_tagger("not a model"), DataError);
  CHECK_THROWS_AS(parse_tagger(""), DataError);
}

TEST_CASE("classifier model file round-trips exactly, hidden layer included") {
  const auto pairs = testsupport::make_synthetic_tc(37, 24, 3);
  TrainConfig config;
  config.dim = 64;
  config.epochs = 3;
  config.seed = 11;
  const SequenceEncoder encoder(config.dim);
  const CombinationStrategy strategy{CombineKind::CONCAT_EMBED_HIDDEN, 0.5, 16};
  ClassifierTrainResult result = train_tc(pairs, strategy, config, encoder);
  result.model.context_cap = 130;

  const std::string text = write_classifier(result.model);
  const ClassifierModel reread = parse_classifier(text);
  CHECK(reread.labels.names == result.model.labels.names);
  CHECK(reread.strategy.kind == CombineKind::CONCAT_EMBED_HIDDEN);
  CHECK(reread.strategy.hidden_dim == 16);
  CHECK(reread.context_kind == result.model.context_kind);
  REQUIRE(reread.hidden.has_value());
  CHECK(reread.hidden->weights == result.model.hidden->weights);
  CHECK(reread.hidden->bias == result.model.hidden->bias);
  CHECK(reread.weights == result.model.weights);
  CHECK(reread.bias == result.model.bias);
  CHECK(write_classifier(reread) == text);

  for (const ContextPair& pair : pairs) {
    CHECK(predict_tc(reread, pair, encoder).probabilities ==
          predict_tc(result.model, pair, encoder).probabilities);
  }
}

namespace {

// Central finite difference of a scalar function of one parameter.
template <typename F>
double central_difference(F&& f, double& param, double step = 1e-5) {
  const double saved = param;
  param = saved + step;
  const double hi = f();
  param = saved - step;
  const double lo = f();
  param = saved;
  return (hi - lo) / (2.0 * step);
}

double rel_error(double analytic, double numeric) {
  const double scale = std::max({1e-3, std::abs(analytic), std::abs(numeric)});
  return std::abs(analytic - numeric) / scale;
}

}  // namespace

TEST_CASE("tagger gradients match finite differences") {
  SeededRng rng(41);
  const std::size_t dim = 8;
  const std::size_t labels = 3;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> weights(labels * dim);
    std::vector<double> bias(labels);
    for (double& w : weights) w = rng.uniform(-1.0, 1.0);
    for (double& b : bias) b = rng.uniform(-1.0, 1.0);
    std::vector<detail::SparseExample> batch;
    const std::size_t batch_size = 1 + rng.below(4);
    for (std::size_t i = 0; i < batch_size; ++i) {
      detail::SparseExample ex;
      for (std::size_t f = 0; f < dim; ++f)
        if (rng.below(2) == 0) ex.features.push_back(f);
      ex.label = rng.below(labels);
      batch.push_back(std::move(ex));
    }
    const auto analytic = detail::tagger_loss_grad(weights, bias, labels, dim, batch, {});
    auto loss = [&] { return detail::tagger_loss_grad(weights, bias, labels, dim, batch, {}).loss; };
    for (std::size_t i = 0; i < weights.size(); ++i)
      CHECK(rel_error(analytic.grad_weights[i], central_difference(loss, weights[i])) < 1e-4);
    for (std::size_t i = 0; i < bias.size(); ++i)
      CHECK(rel_error(analytic.grad_bias[i], central_difference(loss, bias[i])) < 1e-4);
  }
}

TEST_CASE("classifier gradients match finite differences, hidden layer included") {
  SeededRng rng(43);
  const std::size_t dim = 8;
  const std::size_t classes = 3;
  const CombinationStrategy strategy{CombineKind::CONCAT_EMBED_HIDDEN, 0.5, 4};
  const std::size_t feature_dim = combined_dim(strategy, dim) + 1;  // with length feature
  for (int trial = 0; trial < 10; ++trial) {
    detail::ClassifierParams params;
    HiddenLayer hidden;
    hidden.in_dim = dim;
    hidden.out_dim = strategy.hidden_dim;
    hidden.weights.resize(dim * strategy.hidden_dim);
    hidden.bias.resize(strategy.hidden_dim);
    for (double& w : hidden.weights) w = rng.uniform(-1.0, 1.0);
    for (double& b : hidden.bias) b = rng.uniform(-1.0, 1.0);
    params.hidden = hidden;
    params.weights.resize(classes * feature_dim);
    params.bias.resize(classes);
    for (double& w : params.weights) w = rng.uniform(-1.0, 1.0);
    for (double& b : params.bias) b = rng.uniform(-1.0, 1.0);

    std::vector<detail::DenseExample> batch;
    const std::size_t batch_size = 1 + rng.below(3);
    for (std::size_t i = 0; i < batch_size; ++i) {
      detail::DenseExample ex;
      for (std::size_t f = 0; f < dim; ++f) ex.s.push_back(rng.uniform(-1.0, 1.0));
      for (std::size_t f = 0; f < dim; ++f) ex.c.push_back(rng.uniform(-1.0, 1.0));
      ex.length = rng.unit();
      ex.label = rng.below(classes);
      batch.push_back(std::move(ex));
    }

    auto grads = [&] {
      return detail::classifier_loss_grad(params, strategy, true, classes, feature_dim, batch, {});
    };
    const auto analytic = grads();
    auto loss = [&] { return grads().loss; };
    for (std::size_t i = 0; i < params.weights.size(); ++i)
      CHECK(rel_error(analytic.grad_weights[i], central_difference(loss, params.weights[i])) <
            1e-4);
    for (std::size_t i = 0; i < params.bias.size(); ++i)
      CHECK(rel_error(analytic.grad_bias[i], central_difference(loss, params.bias[i])) < 1e-4);
    for (std::size_t i = 0; i < params.hidden->weights.size(); ++i)
      CHECK(rel_error(analytic.grad_hidden_weights[i],
                      central_difference(loss, params.hidden->weights[i])) < 1e-4);
    for (std::size_t i = 0; i < params.hidden->bias.size(); ++i)
      CHECK(rel_error(analytic.grad_hidden_bias[i],
                      central_difference(loss, params.hidden->bias[i])) < 1e-4);
  }
}

TEST_CASE("inverse-frequency class weighting is wired through") {
  const auto pairs = testsupport::make_synthetic_tc(47, 30, 2);
  TrainConfig config = small_config();
  config.class_weighting = true;
  const SequenceEncoder encoder(config.dim);
  const auto weighted = train_tc(pairs, {CombineKind::NONE}, config, encoder);
  config.class_weighting = false;
  const auto plain = train_tc(pairs, {CombineKind::NONE}, config, encoder);
  // Balanced classes: weighting must not change anything.
  CHECK(weighted.model.weights == plain.model.weights);
}
