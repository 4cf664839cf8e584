// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one PASS/FAIL line per criterion. Exit code is the number of
// failed criteria. Criterion 10 needs the official corpus; point
// SPANTAG_TRAIN_ARTICLES, SPANTAG_TRAIN_SI_LABELS, SPANTAG_TRAIN_TC_LABELS
// and (optionally) SPANTAG_DEV_TC_LABELS at it, otherwise that criterion is
// skipped with a notice.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

#include "spantag/analytics.hpp"
#include "spantag/cli.hpp"
#include "spantag/context.hpp"
#include "spantag/corpus.hpp"
#include "spantag/encoder.hpp"
#include "spantag/models.hpp"
#include "spantag/random.hpp"
#include "spantag/scorer.hpp"
#include "spantag/tagcodec.hpp"
#include "spantag/tokenizer.hpp"
#include "si_oracle.hpp"
#include "support.hpp"
#include "synthetic.hpp"

using namespace spantag;

namespace {

int g_failures = 0;

class Timer {
 public:
  Timer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

void report(int number, const std::string& name, bool pass, const std::string& detail) {
  if (!pass) ++g_failures;
  std::cout << (pass ? "PASS" : "FAIL") << "  criterion " << number << ": " << name;
  if (!detail.empty()) std::cout << " (" << detail << ")";
  std::cout << "\n";
}

void report_skip(int number, const std::string& name, const std::string& reason) {
  std::cout << "SKIP  criterion " << number << ": " << name << " (" << reason << ")\n";
}

std::string seconds_str(const Timer& timer) {
  std::ostringstream out;
  out.precision(2);
  out << std::fixed << timer.seconds() << "s";
  return out.str();
}

constexpr Scheme kSchemes[] = {Scheme::PNP, Scheme::BIO, Scheme::BIOE, Scheme::BIOES};

struct TagCase {
  std::vector<Token> tokens;
  std::vector<TokenRange> spans;
  std::vector<CharSpan> expected;  // merged gold runs as char spans (bitmap oracle)
};

TagCase random_tag_case(SeededRng& rng) {
  TagCase c;
  const std::size_t token_count = 1 + rng.below(30);
  std::size_t offset = rng.below(5);
  for (std::size_t i = 0; i < token_count; ++i) {
    const std::size_t len = 1 + rng.below(9);
    c.tokens.push_back(Token{"t" + std::to_string(i), {offset, offset + len}});
    offset += len + 1 + rng.below(3);
  }
  const std::size_t span_count = rng.below(5);
  for (std::size_t i = 0; i < span_count; ++i) {
    const std::size_t begin = rng.below(token_count);
    const std::size_t end = begin + 1 + rng.below(token_count - begin);
    c.spans.push_back({begin, end});
  }
  std::vector<bool> covered(token_count, false);
  for (const TokenRange& r : c.spans)
    for (std::size_t i = r.begin; i < r.end; ++i) covered[i] = true;
  std::size_t i = 0;
  while (i < token_count) {
    if (!covered[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < token_count && covered[j]) ++j;
    c.expected.push_back({c.tokens[i].span.begin, c.tokens[j - 1].span.end});
    i = j;
  }
  return c;
}

void criterion_1_and_2() {
  SeededRng rng(1001);
  Timer timer;
  std::size_t roundtrip_failures = 0;
  std::size_t equivalence_failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const TagCase c = random_tag_case(rng);
    std::vector<std::vector<CharSpan>> decoded;
    for (Scheme scheme : kSchemes) {
      const TagSequence tags = encode_tags(scheme, c.tokens.size(), c.spans);
      decoded.push_back(decode_tags(tags, c.tokens));
      if (decoded.back() != c.expected) ++roundtrip_failures;
    }
    for (std::size_t s = 1; s < decoded.size(); ++s)
      if (decoded[s] != decoded[0]) ++equivalence_failures;
  }
  const bool in_time = timer.seconds() < 5.0;
  report(1, "decode(encode) returns the merged gold spans for all schemes",
         roundtrip_failures == 0 && in_time,
         "1000 cases x 4 schemes, " + std::to_string(roundtrip_failures) + " failures, " +
             seconds_str(timer));
  report(2, "all four schemes decode to identical spans", equivalence_failures == 0,
         "1000 cases, " + std::to_string(equivalence_failures) + " failures");
}

void criterion_3() {
  // Worked examples, exactly.
  const std::vector<SpanAnnotation> pred1 = {{"1", {0, 10}, std::nullopt}};
  const std::vector<SpanAnnotation> gold1 = {{"1", {5, 15}, std::nullopt}};
  const SiScore half = score_si(pred1, gold1);
  bool examples_ok = half.precision == 0.5 && half.recall == 0.5 && half.f1 == 0.5;

  const std::vector<SpanAnnotation> pred2 = {{"1", {0, 10}, std::nullopt},
                                             {"1", {20, 30}, std::nullopt}};
  const std::vector<SpanAnnotation> gold2 = {{"1", {0, 10}, std::nullopt}};
  const SiScore extra = score_si(pred2, gold2);
  examples_ok = examples_ok && extra.precision == 0.5 && extra.recall == 1.0 &&
                extra.f1 == 2.0 * 0.5 * 1.0 / (0.5 + 1.0);

  SeededRng rng(1003);
  std::size_t mismatches = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<SpanAnnotation> pred;
    std::vector<SpanAnnotation> gold;
    const std::size_t articles = 1 + rng.below(2);
    for (std::size_t a = 0; a < articles; ++a) {
      const std::string id = std::to_string(a + 1);
      for (const CharSpan& span : testsupport::random_spans(rng, 200, 5))
        pred.push_back({id, span, std::nullopt});
      for (const CharSpan& span : testsupport::random_spans(rng, 200, 5))
        gold.push_back({id, span, std::nullopt});
    }
    const SiScore score = score_si(pred, gold);
    const testsupport::OracleScore oracle = testsupport::oracle_score_si(pred, gold);
    const double delta = std::max({std::abs(score.precision - oracle.precision),
                                   std::abs(score.recall - oracle.recall),
                                   std::abs(score.f1 - oracle.f1)});
    worst = std::max(worst, delta);
    if (delta >= 1e-12) ++mismatches;
  }
  std::ostringstream detail;
  detail.precision(2);
  detail << "1000 instances, max |delta| " << std::scientific << worst << ", worked examples "
         << (examples_ok ? "exact" : "WRONG");
  report(3, "score_si matches the character-set oracle within 1e-12",
         mismatches == 0 && examples_ok, detail.str());
}

void criterion_4() {
  SeededRng rng(1004);
  const std::vector<std::string> classes = {"A", "B", "C", "D", "E"};
  std::size_t mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng.below(60);
    std::vector<SpanAnnotation> pred, gold;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const CharSpan span{i * 10, i * 10 + 5};
      const std::string p = classes[rng.below(classes.size())];
      const std::string g = classes[rng.below(classes.size())];
      pred.push_back({"1", span, p});
      gold.push_back({"1", span, g});
      if (p == g) ++correct;
    }
    const double accuracy = static_cast<double>(correct) / static_cast<double>(n);
    if (score_tc(pred, gold).micro_f1 != accuracy) ++mismatches;
  }
  report(4, "micro-F1 equals accuracy exactly on single-label instances", mismatches == 0,
         "1000 instances, " + std::to_string(mismatches) + " mismatches");
}

double grad_rel_error(double analytic, double numeric) {
  const double scale = std::max({1e-3, std::abs(analytic), std::abs(numeric)});
  return std::abs(analytic - numeric) / scale;
}

void criterion_5() {
  SeededRng rng(1005);
  const std::size_t dim = 8;
  double worst = 0.0;
  const double step = 1e-5;

  // 50 tagger instances.
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t labels = 2 + rng.below(3);
    std::vector<double> weights(labels * dim), bias(labels);
    for (double& w : weights) w = rng.uniform(-1.0, 1.0);
    for (double& b : bias) b = rng.uniform(-1.0, 1.0);
    std::vector<detail::SparseExample> batch(1 + rng.below(4));
    for (auto& ex : batch) {
      for (std::size_t f = 0; f < dim; ++f)
        if (rng.below(2) == 0) ex.features.push_back(f);
      ex.label = rng.below(labels);
    }
    const auto analytic = detail::tagger_loss_grad(weights, bias, labels, dim, batch, {});
    auto loss = [&] {
      return detail::tagger_loss_grad(weights, bias, labels, dim, batch, {}).loss;
    };
    auto check_param = [&](double& param, double analytic_grad) {
      const double saved = param;
      param = saved + step;
      const double hi = loss();
      param = saved - step;
      const double lo = loss();
      param = saved;
      worst = std::max(worst, grad_rel_error(analytic_grad, (hi - lo) / (2.0 * step)));
    };
    for (std::size_t i = 0; i < weights.size(); ++i) check_param(weights[i], analytic.grad_weights[i]);
    for (std::size_t i = 0; i < bias.size(); ++i) check_param(bias[i], analytic.grad_bias[i]);
  }

  // 50 classifier instances through the hidden-layer path.
  const CombinationStrategy strategy{CombineKind::CONCAT_EMBED_HIDDEN, 0.5, 4};
  const std::size_t feature_dim = combined_dim(strategy, dim) + 1;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t classes = 2 + rng.below(3);
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
    std::vector<detail::DenseExample> batch(1 + rng.below(3));
    for (auto& ex : batch) {
      for (std::size_t f = 0; f < dim; ++f) ex.s.push_back(rng.uniform(-1.0, 1.0));
      for (std::size_t f = 0; f < dim; ++f) ex.c.push_back(rng.uniform(-1.0, 1.0));
      ex.length = rng.unit();
      ex.label = rng.below(classes);
    }
    auto full = [&] {
      return detail::classifier_loss_grad(params, strategy, true, classes, feature_dim, batch, {});
    };
    const auto analytic = full();
    auto loss = [&] { return full().loss; };
    auto check_param = [&](double& param, double analytic_grad) {
      const double saved = param;
      param = saved + step;
      const double hi = loss();
      param = saved - step;
      const double lo = loss();
      param = saved;
      worst = std::max(worst, grad_rel_error(analytic_grad, (hi - lo) / (2.0 * step)));
    };
    for (std::size_t i = 0; i < params.weights.size(); ++i)
      check_param(params.weights[i], analytic.grad_weights[i]);
    for (std::size_t i = 0; i < params.bias.size(); ++i)
      check_param(params.bias[i], analytic.grad_bias[i]);
    for (std::size_t i = 0; i < params.hidden->weights.size(); ++i)
      check_param(params.hidden->weights[i], analytic.grad_hidden_weights[i]);
    for (std::size_t i = 0; i < params.hidden->bias.size(); ++i)
      check_param(params.hidden->bias[i], analytic.grad_hidden_bias[i]);
  }

  std::ostringstream detail_str;
  detail_str.precision(2);
  detail_str << "100 instances, worst relative error " << std::scientific << worst;
  report(5, "analytic gradients match central finite differences", worst < 1e-4, detail_str.str());
}

void criterion_6() {
  Timer timer;
  const auto corpus = testsupport::make_synthetic_si(1006, 30);
  TrainConfig config;
  config.dim = 256;
  config.learning_rate = 0.1;
  config.epochs = 50;
  config.batch_size = 8;
  config.seed = 42;
  const TaggerTrainResult result = train_si(corpus.tagged(Scheme::BIOE), Scheme::BIOE, config);
  std::vector<SpanAnnotation> predictions;
  for (const Article& article : corpus.articles) {
    const auto spans = predict_si(result.model, article);
    predictions.insert(predictions.end(), spans.begin(), spans.end());
  }
  const double f1 = score_si(predictions, corpus.gold).f1;
  const double elapsed = timer.seconds();
  std::ostringstream detail;
  detail.precision(3);
  detail << "train-set span F1 " << std::fixed << f1 << ", " << seconds_str(timer);
  report(6, "synthetic 30-sentence corpus overfits to F1 >= 0.95 within 50 epochs",
         f1 >= 0.95 && elapsed < 10.0, detail.str());
}

void criterion_7() {
  const auto pairs = testsupport::make_synthetic_tc(1007, 50, 2);
  TrainConfig config;
  config.dim = 128;
  config.epochs = 10;
  config.seed = 9;
  const SequenceEncoder encoder(config.dim);

  bool vectors_equal = true;
  for (const ContextPair& pair : pairs) {
    const auto v_none = build_feature_vector(pair, {CombineKind::NONE}, nullptr, encoder, false);
    const auto v_wavg =
        build_feature_vector(pair, {CombineKind::WEIGHTED_AVG, 1.0, 0}, nullptr, encoder, false);
    vectors_equal = vectors_equal && v_none == v_wavg;
  }

  const auto none = train_tc(pairs, {CombineKind::NONE}, config, encoder);
  const auto wavg = train_tc(pairs, {CombineKind::WEIGHTED_AVG, 1.0, 0}, config, encoder);
  const bool params_equal =
      none.model.weights == wavg.model.weights && none.model.bias == wavg.model.bias;
  bool predictions_equal = true;
  for (const ContextPair& pair : pairs) {
    const auto a = predict_tc(none.model, pair, encoder);
    const auto b = predict_tc(wavg.model, pair, encoder);
    predictions_equal =
        predictions_equal && a.technique == b.technique && a.probabilities == b.probabilities;
  }
  report(7, "WEIGHTED_AVG(alpha=1) is identical to NONE",
         vectors_equal && params_equal && predictions_equal,
         std::string("V vectors ") + (vectors_equal ? "equal" : "differ") + ", parameters " +
             (params_equal ? "equal" : "differ") + ", predictions " +
             (predictions_equal ? "equal" : "differ") + " on 50 pairs");
}

void criterion_8() {
  SeededRng rng(1008);
  std::size_t cap_violations = 0;
  std::size_t containment_violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Article article = make_article("1", testsupport::random_article_text(rng, 6, 60));
    const std::size_t length = text_length(article);
    for (const CharSpan& span : testsupport::random_spans(rng, length, 2)) {
      const ContextPair pair = extract_sentence_context(article, span);
      if (tokenize(pair.context_text, 0).size() > 130) ++cap_violations;
      if (tokenize(pair.fragment_text, 0).size() <= 130 &&
          pair.context_text.find(pair.fragment_text) == std::string::npos)
        ++containment_violations;
    }
  }
  report(8, "SENTENCE context is capped at 130 words and contains the fragment",
         cap_violations == 0 && containment_violations == 0,
         "1000 articles, " + std::to_string(cap_violations) + " cap / " +
             std::to_string(containment_violations) + " containment violations");
}

void criterion_9() {
  testsupport::TempDir dir("acceptance");
  // Small two-article corpus with separable spans.
  dir.write("corpus/article1.txt", "Calm morning report\nThe zorblat vexing scheme returned\n");
  dir.write("corpus/article2.txt", "Market news today\nPrices rose before the grumblie rumor\n");
  dir.write("si.tsv", "1\t24\t38\n2\t41\t49\n");
  const std::string articles = dir.file("corpus").string();
  const std::string labels = dir.file("si.tsv").string();
  const std::string model = dir.file("si.model").string();
  const std::string pred = dir.file("pred.tsv").string();

  // The CLI chatters on stdout; keep the criterion output to one line.
  std::ostringstream sink;
  std::streambuf* saved = std::cout.rdbuf(sink.rdbuf());
  int rc = cli::run({"train-si", "--articles", articles, "--labels", labels, "--scheme", "BIOE",
                     "--split", "1.0", "--epochs", "5", "--dim", "64", "--seed", "7", "--model",
                     model});
  rc |= cli::run({"predict-si", "--articles", articles, "--model", model, "--out", pred});
  const std::string model_bytes = testsupport::read_all(model);
  const std::string pred_bytes = testsupport::read_all(pred);
  const std::string model_manifest = testsupport::read_all(model + ".manifest");
  const std::string pred_manifest = testsupport::read_all(pred + ".manifest");

  // Second run driven purely by the manifests.
  rc |= cli::run({"train-si", "--config", model + ".manifest"});
  rc |= cli::run({"predict-si", "--config", pred + ".manifest"});
  std::cout.rdbuf(saved);

  const bool identical = testsupport::read_all(model) == model_bytes &&
                         testsupport::read_all(pred) == pred_bytes &&
                         testsupport::read_all(model + ".manifest") == model_manifest &&
                         testsupport::read_all(pred + ".manifest") == pred_manifest;
  report(9, "pipeline reruns from the manifest are byte-identical", rc == 0 && identical,
         identical ? "model, predictions and manifests unchanged" : "outputs differ");
}

std::size_t count_technique(const std::vector<std::pair<std::string, std::size_t>>& hist,
                            const std::string& prefix) {
  for (const auto& [name, count] : hist)
    if (name.starts_with(prefix)) return count;
  return 0;
}

void criterion_10() {
  const char* articles_dir = std::getenv("SPANTAG_TRAIN_ARTICLES");
  const char* si_labels = std::getenv("SPANTAG_TRAIN_SI_LABELS");
  const char* tc_labels = std::getenv("SPANTAG_TRAIN_TC_LABELS");
  const char* dev_tc = std::getenv("SPANTAG_DEV_TC_LABELS");
  if (articles_dir == nullptr || si_labels == nullptr || tc_labels == nullptr) {
    report_skip(10, "official corpus statistics",
                "corpus not available; set SPANTAG_TRAIN_ARTICLES, SPANTAG_TRAIN_SI_LABELS, "
                "SPANTAG_TRAIN_TC_LABELS");
    return;
  }
  try {
    const std::vector<Article> articles = load_articles(articles_dir);
    std::size_t sentences = 0;
    std::size_t tokens = 0;
    std::size_t positive = 0;
    const auto si = parse_annotations(testsupport::read_all(si_labels), AnnotationKind::SI,
                                      si_labels);
    std::map<std::string, std::vector<CharSpan>> grouped;
    for (const SpanAnnotation& ann : si) grouped[ann.article_id].push_back(ann.span);
    for (const Article& article : articles) {
      const auto it = grouped.find(article.id);
      for (const Sentence& sentence : split_sentences(article)) {
        ++sentences;
        tokens += sentence.tokens.size();
        if (it == grouped.end()) continue;
        for (const Token& token : sentence.tokens)
          for (const CharSpan& span : it->second)
            if (overlap_length(token.span, span) > 0) {
              ++positive;
              break;
            }
      }
    }
    const double fraction =
        tokens == 0 ? 0.0 : static_cast<double>(positive) / static_cast<double>(tokens);
    const auto tc = parse_annotations(testsupport::read_all(tc_labels), AnnotationKind::TC,
                                      tc_labels);
    const auto hist = class_histogram(tc);
    const std::size_t loaded = count_technique(hist, "Loaded_Language");
    const std::size_t cliche = count_technique(hist, "Thought-terminating");

    bool ok = sentences == 17855;
    ok = ok && fraction >= 0.10 && fraction <= 0.16;
    ok = ok && tc.size() == 6129;
    ok = ok && loaded == 2123 && cliche == 76;

    std::ostringstream detail;
    detail << "sentences " << sentences << ", positive fraction " << fraction << ", tc pairs "
           << tc.size() << ", Loaded_Language " << loaded << ", Thought-terminating " << cliche;

    if (dev_tc != nullptr) {
      const auto dev = parse_annotations(testsupport::read_all(dev_tc), AnnotationKind::TC, dev_tc);
      std::vector<CharSpan> spans;
      for (const SpanAnnotation& ann : dev) spans.push_back(ann.span);
      double sum = 0.0;
      for (const CharSpan& span : spans) sum += static_cast<double>(span.length());
      const double avg = sum / static_cast<double>(spans.size());
      ok = ok && std::abs(avg - 38.0) <= 2.0;
      detail << ", dev avg span length " << avg;
    } else {
      detail << ", dev labels not provided";
    }
    report(10, "official corpus statistics", ok, detail.str());
  } catch (const std::exception& e) {
    report(10, "official corpus statistics", false, e.what());
  }
}

}  // namespace

int main() {
  criterion_1_and_2();
  criterion_3();
  criterion_4();
  criterion_5();
  criterion_6();
  criterion_7();
  criterion_8();
  criterion_9();
  criterion_10();
  if (g_failures == 0)
    std::cout << "all acceptance criteria passed\n";
  else
    std::cout << g_failures << " acceptance criteria FAILED\n";
  return g_failures;
}
