#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "spantag/analytics.hpp"
#include "spantag/cli.hpp"
#include "spantag/context.hpp"
#include "spantag/corpus.hpp"
#include "spantag/encoder.hpp"
#include "spantag/errors.hpp"
#include "spantag/models.hpp"
#include "spantag/scorer.hpp"
#include "spantag/tagcodec.hpp"
#include "spantag/tokenizer.hpp"
#include "spantag/unicode.hpp"

namespace py = pybind11;
using namespace spantag;

namespace {

void bind_corpus(py::module_& m) {
  py::class_<CharSpan>(m, "CharSpan")
      .def(py::init<>())
      .def(py::init([](std::size_t begin, std::size_t end) {
             return CharSpan{begin, end};
           }),
           py::arg("begin"), py::arg("end"))
      .def_readwrite("begin", &CharSpan::begin)
      .def_readwrite("end", &CharSpan::end)
      .def("length", &CharSpan::length)
      .def(py::self == py::self)
      .def("__repr__", [](const CharSpan& s) {
        return "CharSpan(" + std::to_string(s.begin) + ", " + std::to_string(s.end) + ")";
      });

  py::class_<Article>(m, "Article")
      .def(py::init([](const std::string& id, const std::string& text) {
             return make_article(id, text);
           }),
           py::arg("id"), py::arg("text"))
      .def_readonly("id", &Article::id)
      .def_readonly("text", &Article::text)
      .def_readonly("title", &Article::title)
      .def("__len__", [](const Article& a) { return text_length(a); })
      .def("__repr__", [](const Article& a) { return "Article(id=" + a.id + ")"; });

  py::class_<SpanAnnotation>(m, "SpanAnnotation")
      .def(py::init([](const std::string& article_id, CharSpan span,
                       const std::optional<std::string>& technique) {
             return SpanAnnotation{article_id, span, technique};
           }),
           py::arg("article_id"), py::arg("span"), py::arg("technique") = std::nullopt)
      .def_readwrite("article_id", &SpanAnnotation::article_id)
      .def_readwrite("span", &SpanAnnotation::span)
      .def_readwrite("technique", &SpanAnnotation::technique)
      .def(py::self == py::self)
      .def("__repr__", [](const SpanAnnotation& a) {
        return "SpanAnnotation(" + a.article_id + ", [" + std::to_string(a.span.begin) + ", " +
               std::to_string(a.span.end) + "), " + (a.technique ? *a.technique : "-") + ")";
      });

  py::enum_<AnnotationKind>(m, "AnnotationKind")
      .value("SI", AnnotationKind::SI)
      .value("TC", AnnotationKind::TC);

  py::class_<LabelInventory>(m, "LabelInventory")
      .def(py::init<>())
      .def_readonly("names", &LabelInventory::names)
      .def("__len__", &LabelInventory::size)
      .def("index_of", &LabelInventory::index_of, py::arg("name"));

  m.def("load_article", &load_article, py::arg("path"));
  m.def("load_articles", &load_articles, py::arg("directory"));
  m.def("make_article", &make_article, py::arg("id"), py::arg("text"));
  m.def("text_length", &text_length, py::arg("article"));
  m.def("slice", &slice, py::arg("article"), py::arg("span"));
  m.def(
      "parse_annotations",
      [](const std::string& tsv, AnnotationKind kind, const std::string& source) {
        return parse_annotations(tsv, kind, source);
      },
      py::arg("tsv_text"), py::arg("kind"), py::arg("source") = std::string());
  m.def(
      "write_annotations",
      [](const std::vector<SpanAnnotation>& annotations, AnnotationKind kind) {
        return write_annotations(annotations, kind);
      },
      py::arg("annotations"), py::arg("kind"));
  m.def(
      "build_label_inventory",
      [](const std::vector<SpanAnnotation>& annotations) {
        return build_label_inventory(annotations);
      },
      py::arg("annotations"));
  m.def(
      "validate_offsets",
      [](const Article& article, const std::vector<SpanAnnotation>& annotations) {
        return validate_offsets(article, annotations);
      },
      py::arg("article"), py::arg("annotations"));
}

void bind_tokenizer(py::module_& m) {
  py::class_<Token>(m, "Token")
      .def(py::init([](const std::string& text, CharSpan span) {
             return Token{text, span};
           }),
           py::arg("text"), py::arg("span"))
      .def_readwrite("text", &Token::text)
      .def_readwrite("span", &Token::span)
      .def(py::self == py::self)
      .def("__repr__", [](const Token& t) {
        return "Token(" + t.text + ", [" + std::to_string(t.span.begin) + ", " +
               std::to_string(t.span.end) + "))";
      });

  py::class_<Sentence>(m, "Sentence")
      .def_readonly("article_id", &Sentence::article_id)
      .def_readonly("span", &Sentence::span)
      .def_readonly("tokens", &Sentence::tokens);

  py::class_<TokenRange>(m, "TokenRange")
      .def(py::init([](std::size_t begin, std::size_t end) {
             return TokenRange{begin, end};
           }),
           py::arg("begin"), py::arg("end"))
      .def_readwrite("begin", &TokenRange::begin)
      .def_readwrite("end", &TokenRange::end)
      .def("empty", &TokenRange::empty)
      .def("__len__", &TokenRange::size)
      .def(py::self == py::self)
      .def("__repr__", [](const TokenRange& r) {
        return "TokenRange(" + std::to_string(r.begin) + ", " + std::to_string(r.end) + ")";
      });

  m.def("split_sentences", &split_sentences, py::arg("article"));
  m.def(
      "tokenize",
      [](const std::string& text, std::size_t offset) { return tokenize(text, offset); },
      py::arg("sentence_text"), py::arg("offset") = 0);
  m.def(
      "snap_span",
      [](CharSpan span, const std::vector<Token>& tokens) { return snap_span(span, tokens); },
      py::arg("span"), py::arg("tokens"));
}

void bind_tagcodec(py::module_& m) {
  py::enum_<Scheme>(m, "Scheme")
      .value("PNP", Scheme::PNP)
      .value("BIO", Scheme::BIO)
      .value("BIOE", Scheme::BIOE)
      .value("BIOES", Scheme::BIOES);

  py::enum_<Tag>(m, "Tag")
      .value("O", Tag::O)
      .value("P", Tag::P)
      .value("B", Tag::B)
      .value("I", Tag::I)
      .value("E", Tag::E)
      .value("S", Tag::S);

  py::class_<TagSequence>(m, "TagSequence")
      .def(py::init([](Scheme scheme, const std::vector<Tag>& labels) {
             return make_tag_sequence(scheme, labels);
           }),
           py::arg("scheme"), py::arg("labels"))
      .def_readonly("scheme", &TagSequence::scheme)
      .def_readonly("labels", &TagSequence::labels)
      .def("__len__", &TagSequence::size)
      .def(py::self == py::self)
      .def("__repr__", [](const TagSequence& t) {
        return "TagSequence(" + std::string(scheme_name(t.scheme)) + ", \"" + format_tags(t) +
               "\")";
      });

  py::class_<TagViolation>(m, "TagViolation")
      .def_readonly("index", &TagViolation::index)
      .def_readonly("message", &TagViolation::message)
      .def("__repr__", [](const TagViolation& v) { return v.message; });

  m.def("scheme_from_name", &scheme_from_name, py::arg("name"));
  m.def("scheme_name", [](Scheme s) { return std::string(scheme_name(s)); }, py::arg("scheme"));
  m.def(
      "encode_tags",
      [](Scheme scheme, std::size_t token_count, const std::vector<TokenRange>& spans) {
        return encode_tags(scheme, token_count, spans);
      },
      py::arg("scheme"), py::arg("token_count"), py::arg("spans"));
  m.def(
      "decode_tags",
      [](const TagSequence& tags, const std::vector<Token>& tokens) {
        return decode_tags(tags, tokens);
      },
      py::arg("tags"), py::arg("tokens"));
  m.def("positive_runs", &positive_runs, py::arg("tags"));
  m.def("validate_tags", &validate_tags, py::arg("tags"));
  m.def("convert_tags", &convert_tags, py::arg("tags"), py::arg("target"));
  m.def("format_tags", &format_tags, py::arg("tags"));
  m.def(
      "parse_tags",
      [](const std::string& line, Scheme scheme) { return parse_tags(line, scheme); },
      py::arg("line"), py::arg("scheme"));
}

void bind_scorer(py::module_& m) {
  py::class_<PrfScore>(m, "PrfScore")
      .def_readonly("precision", &PrfScore::precision)
      .def_readonly("recall", &PrfScore::recall)
      .def_readonly("f1", &PrfScore::f1);

  py::class_<SiScore>(m, "SiScore")
      .def_readonly("precision", &SiScore::precision)
      .def_readonly("recall", &SiScore::recall)
      .def_readonly("f1", &SiScore::f1)
      .def_readonly("per_article", &SiScore::per_article)
      .def("__repr__", [](const SiScore& s) {
        return "SiScore(P=" + std::to_string(s.precision) + ", R=" + std::to_string(s.recall) +
               ", F1=" + std::to_string(s.f1) + ")";
      });

  py::class_<ClassScore>(m, "ClassScore")
      .def_readonly("precision", &ClassScore::precision)
      .def_readonly("recall", &ClassScore::recall)
      .def_readonly("f1", &ClassScore::f1)
      .def_readonly("support", &ClassScore::support);

  py::class_<TcScore>(m, "TcScore")
      .def_readonly("micro_f1", &TcScore::micro_f1)
      .def_readonly("per_class", &TcScore::per_class)
      .def("__repr__",
           [](const TcScore& s) { return "TcScore(micro_f1=" + std::to_string(s.micro_f1) + ")"; });

  m.def("overlap_fraction", &overlap_fraction, py::arg("s"), py::arg("t"), py::arg("h"));
  m.def("merge_overlapping", &merge_overlapping, py::arg("spans"));
  m.def(
      "score_si",
      [](const std::vector<SpanAnnotation>& pred, const std::vector<SpanAnnotation>& gold) {
        return score_si(pred, gold);
      },
      py::arg("pred"), py::arg("gold"));
  m.def(
      "score_tc",
      [](const std::vector<SpanAnnotation>& pred, const std::vector<SpanAnnotation>& gold) {
        return score_tc(pred, gold);
      },
      py::arg("pred"), py::arg("gold"));
}

void bind_context(py::module_& m) {
  py::enum_<ContextKind>(m, "ContextKind")
      .value("NONE", ContextKind::NONE)
      .value("SENTENCE", ContextKind::SENTENCE)
      .value("TITLE", ContextKind::TITLE);

  py::class_<ContextOptions>(m, "ContextOptions")
      .def(py::init<>())
      .def_readwrite("cap_words", &ContextOptions::cap_words)
      .def_readwrite("cap_includes_fragment", &ContextOptions::cap_includes_fragment);

  py::class_<ContextPair>(m, "ContextPair")
      .def(py::init<>())
      .def_readwrite("article_id", &ContextPair::article_id)
      .def_readwrite("span", &ContextPair::span)
      .def_readwrite("technique", &ContextPair::technique)
      .def_readwrite("kind", &ContextPair::kind)
      .def_readwrite("fragment_text", &ContextPair::fragment_text)
      .def_readwrite("context_text", &ContextPair::context_text)
      .def_readwrite("context_span", &ContextPair::context_span)
      .def("__repr__", [](const ContextPair& p) {
        return "ContextPair(" + p.article_id + ", \"" + p.fragment_text + "\")";
      });

  m.def("extract_sentence_context", &extract_sentence_context, py::arg("article"), py::arg("span"),
        py::arg("options") = ContextOptions{});
  m.def("extract_title_context", &extract_title_context, py::arg("article"));
  m.def(
      "build_tc_dataset",
      [](const std::vector<Article>& articles, const std::vector<SpanAnnotation>& annotations,
         ContextKind kind, const ContextOptions& options) {
        return build_tc_dataset(articles, annotations, kind, options);
      },
      py::arg("articles"), py::arg("annotations"), py::arg("kind"),
      py::arg("options") = ContextOptions{});
  m.def(
      "write_context_pairs",
      [](const std::vector<ContextPair>& pairs) { return write_context_pairs(pairs); },
      py::arg("pairs"));
  m.def(
      "parse_context_pairs",
      [](const std::string& tsv, const std::string& source) {
        return parse_context_pairs(tsv, source);
      },
      py::arg("tsv_text"), py::arg("source") = std::string());
}

void bind_encoder(py::module_& m) {
  py::enum_<PositionBucket>(m, "PositionBucket")
      .value("Begin", PositionBucket::Begin)
      .value("Middle", PositionBucket::Middle)
      .value("End", PositionBucket::End);

  py::enum_<CombineKind>(m, "CombineKind")
      .value("NONE", CombineKind::NONE)
      .value("CONCAT_TEXT", CombineKind::CONCAT_TEXT)
      .value("CONCAT_EMBED", CombineKind::CONCAT_EMBED)
      .value("CONCAT_EMBED_HIDDEN", CombineKind::CONCAT_EMBED_HIDDEN)
      .value("ADD", CombineKind::ADD)
      .value("WEIGHTED_AVG", CombineKind::WEIGHTED_AVG);

  py::class_<CombinationStrategy>(m, "CombinationStrategy")
      .def(py::init([](CombineKind kind, double alpha, std::size_t hidden_dim) {
             return CombinationStrategy{kind, alpha, hidden_dim};
           }),
           py::arg("kind") = CombineKind::NONE, py::arg("alpha") = 0.5,
           py::arg("hidden_dim") = 64)
      .def_readwrite("kind", &CombinationStrategy::kind)
      .def_readwrite("alpha", &CombinationStrategy::alpha)
      .def_readwrite("hidden_dim", &CombinationStrategy::hidden_dim);

  py::class_<HiddenLayer>(m, "HiddenLayer")
      .def_readonly("in_dim", &HiddenLayer::in_dim)
      .def_readonly("out_dim", &HiddenLayer::out_dim)
      .def_readonly("weights", &HiddenLayer::weights)
      .def_readonly("bias", &HiddenLayer::bias);

  py::class_<VectorStore>(m, "VectorStore")
      .def(py::init<>())
      .def_static(
          "parse_tsv",
          [](const std::string& tsv, const std::string& source) {
            return VectorStore::parse_tsv(tsv, source);
          },
          py::arg("tsv_text"), py::arg("source") = std::string())
      .def("__len__", &VectorStore::size)
      .def("dim", &VectorStore::dim)
      .def(
          "lookup",
          [](const VectorStore& store, const std::string& key) -> std::optional<std::vector<double>> {
            const std::vector<double>* v = store.lookup(key);
            if (v == nullptr) return std::nullopt;
            return *v;
          },
          py::arg("key"));

  py::class_<SequenceEncoder>(m, "SequenceEncoder")
      .def(py::init<std::size_t, VectorStore>(), py::arg("dim") = 256,
           py::arg("overrides") = VectorStore{})
      .def("dim", &SequenceEncoder::dim)
      .def(
          "encode_text",
          [](const SequenceEncoder& e, const std::string& text) { return e.encode_text(text); },
          py::arg("text"))
      .def(
          "encode_keyed",
          [](const SequenceEncoder& e, const std::string& key, const std::string& text) {
            return e.encode_keyed(key, text);
          },
          py::arg("key"), py::arg("text"));

  m.def("position_bucket", &position_bucket, py::arg("index"), py::arg("token_count"));
  m.def(
      "featurize_token",
      [](const std::string& text, PositionBucket bucket) { return featurize_token(text, bucket); },
      py::arg("token_text"), py::arg("bucket"));
  m.def("fnv1a64", [](const std::string& s) { return fnv1a64(s); }, py::arg("data"));
  m.def(
      "hash_feature",
      [](const std::string& feature, std::size_t dim) { return hash_feature(feature, dim); },
      py::arg("feature"), py::arg("dim"));
  m.def(
      "token_feature_indices",
      [](const std::string& text, PositionBucket bucket, std::size_t dim) {
        return token_feature_indices(text, bucket, dim);
      },
      py::arg("token_text"), py::arg("bucket"), py::arg("dim"));
  m.def(
      "encode_sequence",
      [](const std::string& text, std::size_t dim) { return encode_sequence(text, dim); },
      py::arg("text"), py::arg("dim") = 256);
  m.def("combined_dim", &combined_dim, py::arg("strategy"), py::arg("dim"));
  m.def(
      "combine",
      [](const std::vector<double>& s, const std::vector<double>& c,
         const CombinationStrategy& strategy, const std::optional<HiddenLayer>& hidden) {
        return combine(s, c, strategy, hidden ? &*hidden : nullptr);
      },
      py::arg("s"), py::arg("c"), py::arg("strategy"), py::arg("hidden") = std::nullopt);
  m.def("span_key", &span_key, py::arg("article_id"), py::arg("span"));
  m.def("title_key", &title_key, py::arg("article_id"));
}

void bind_models(py::module_& m) {
  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("dim", &TrainConfig::dim)
      .def_readwrite("learning_rate", &TrainConfig::learning_rate)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("batch_size", &TrainConfig::batch_size)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("class_weighting", &TrainConfig::class_weighting);

  py::class_<TaggerModel>(m, "TaggerModel")
      .def_readonly("scheme", &TaggerModel::scheme)
      .def_readonly("config", &TaggerModel::config)
      .def_readonly("weights", &TaggerModel::weights)
      .def_readonly("bias", &TaggerModel::bias)
      .def("label_count", &TaggerModel::label_count);

  py::class_<TaggerTrainResult>(m, "TaggerTrainResult")
      .def_readonly("model", &TaggerTrainResult::model)
      .def_readonly("epoch_loss", &TaggerTrainResult::epoch_loss);

  py::class_<TaggedSentence>(m, "TaggedSentence")
      .def(py::init([](const std::vector<Token>& tokens, const TagSequence& tags) {
             return TaggedSentence{tokens, tags};
           }),
           py::arg("tokens"), py::arg("tags"))
      .def_readwrite("tokens", &TaggedSentence::tokens)
      .def_readwrite("tags", &TaggedSentence::tags);

  py::class_<ClassifierModel>(m, "ClassifierModel")
      .def_readonly("labels", &ClassifierModel::labels)
      .def_readonly("strategy", &ClassifierModel::strategy)
      .def_readonly("context_kind", &ClassifierModel::context_kind)
      .def_readonly("context_cap", &ClassifierModel::context_cap)
      .def_readonly("length_feature", &ClassifierModel::length_feature)
      .def_readonly("config", &ClassifierModel::config)
      .def_readonly("hidden", &ClassifierModel::hidden)
      .def_readonly("weights", &ClassifierModel::weights)
      .def_readonly("bias", &ClassifierModel::bias)
      .def("class_count", &ClassifierModel::class_count)
      .def("feature_dim", &ClassifierModel::feature_dim);

  py::class_<ClassifierTrainResult>(m, "ClassifierTrainResult")
      .def_readonly("model", &ClassifierTrainResult::model)
      .def_readonly("epoch_loss", &ClassifierTrainResult::epoch_loss);

  py::class_<TcPrediction>(m, "TcPrediction")
      .def_readonly("technique", &TcPrediction::technique)
      .def_readonly("class_index", &TcPrediction::class_index)
      .def_readonly("probabilities", &TcPrediction::probabilities);

  m.def(
      "train_si",
      [](const std::vector<TaggedSentence>& sentences, Scheme scheme, const TrainConfig& config) {
        return train_si(sentences, scheme, config);
      },
      py::arg("sentences"), py::arg("scheme"), py::arg("config") = TrainConfig{});
  m.def(
      "predict_tags",
      [](const TaggerModel& model, const std::vector<Token>& tokens) {
        return predict_tags(model, tokens);
      },
      py::arg("model"), py::arg("tokens"));
  m.def("predict_si", &predict_si, py::arg("model"), py::arg("article"));
  m.def(
      "train_tc",
      [](const std::vector<ContextPair>& pairs, const CombinationStrategy& strategy,
         const TrainConfig& config, const SequenceEncoder& encoder, bool length_feature) {
        return train_tc(pairs, strategy, config, encoder, length_feature);
      },
      py::arg("pairs"), py::arg("strategy"), py::arg("config"), py::arg("encoder"),
      py::arg("length_feature") = false);
  m.def("predict_tc", &predict_tc, py::arg("model"), py::arg("pair"), py::arg("encoder"));
  m.def(
      "build_feature_vector",
      [](const ContextPair& pair, const CombinationStrategy& strategy,
         const std::optional<HiddenLayer>& hidden, const SequenceEncoder& encoder,
         bool length_feature) {
        return build_feature_vector(pair, strategy, hidden ? &*hidden : nullptr, encoder,
                                    length_feature);
      },
      py::arg("pair"), py::arg("strategy"), py::arg("hidden"), py::arg("encoder"),
      py::arg("length_feature") = false);
  m.def("write_tagger", &write_tagger, py::arg("model"));
  m.def(
      "parse_tagger",
      [](const std::string& text, const std::string& source) { return parse_tagger(text, source); },
      py::arg("text"), py::arg("source") = std::string());
  m.def("write_classifier", &write_classifier, py::arg("model"));
  m.def(
      "parse_classifier",
      [](const std::string& text, const std::string& source) {
        return parse_classifier(text, source);
      },
      py::arg("text"), py::arg("source") = std::string());
  m.def(
      "softmax", [](const std::vector<double>& logits) { return softmax(logits); },
      py::arg("logits"));
}

void bind_analytics(py::module_& m) {
  py::enum_<LengthUnit>(m, "LengthUnit")
      .value("Chars", LengthUnit::Chars)
      .value("Words", LengthUnit::Words);

  py::enum_<LengthGrouping>(m, "LengthGrouping")
      .value("Technique", LengthGrouping::Technique)
      .value("Category", LengthGrouping::Category)
      .value("All", LengthGrouping::All);

  py::class_<LengthHistogram>(m, "LengthHistogram")
      .def_readonly("key", &LengthHistogram::key)
      .def_readonly("bin_width", &LengthHistogram::bin_width)
      .def_readonly("bins", &LengthHistogram::bins)
      .def_readonly("mean", &LengthHistogram::mean)
      .def_readonly("median", &LengthHistogram::median)
      .def_readonly("total", &LengthHistogram::total);

  m.def(
      "class_histogram",
      [](const std::vector<SpanAnnotation>& annotations) { return class_histogram(annotations); },
      py::arg("annotations"));
  m.def(
      "span_length_distribution",
      [](const std::vector<SpanAnnotation>& annotations, const std::vector<Article>& articles,
         LengthUnit unit, LengthGrouping grouping, std::size_t bin_width) {
        return span_length_distribution(annotations, articles, unit, grouping, bin_width);
      },
      py::arg("annotations"), py::arg("articles") = std::vector<Article>{},
      py::arg("unit") = LengthUnit::Chars, py::arg("grouping") = LengthGrouping::Technique,
      py::arg("bin_width") = 0);
  m.def(
      "average_span_length",
      [](const std::vector<CharSpan>& spans) { return average_span_length(spans); },
      py::arg("spans"));
  m.def("category1_techniques", &category1_techniques);
  m.def("technique_category", &technique_category, py::arg("technique"));
  m.def(
      "histogram_csv",
      [](const std::vector<LengthHistogram>& histograms) { return histogram_csv(histograms); },
      py::arg("histograms"));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Propaganda span identification and technique classification toolkit";

  py::register_exception<DataError>(m, "DataError");

  bind_corpus(m);
  bind_tokenizer(m);
  bind_tagcodec(m);
  bind_scorer(m);
  bind_context(m);
  bind_encoder(m);
  bind_models(m);
  bind_analytics(m);

  m.def("decode_utf8_length", &utf8_length, py::arg("text"),
        "Number of Unicode scalar values in a UTF-8 string");
  m.def("split_train_dev", &cli::split_train_dev, py::arg("article_ids"), py::arg("fraction"),
        py::arg("seed"));
  m.def(
      "run_cli", [](const std::vector<std::string>& args) { return cli::run(args); },
      py::arg("args"), "Run a spantag CLI subcommand in-process; returns the exit code");

  m.attr("__version__") = "1.0.0";
}
