"""End-to-end smoke tests for the spantag python module."""

import pytest

import spantag as st


@pytest.fixture
def corpus(tmp_path):
    root = tmp_path / "corpus"
    root.mkdir()
    (root / "article1.txt").write_text(
        "Glorious leader graces our town\n\nThe zorblat quixotic plan begins today\n",
        encoding="utf-8",
    )
    (root / "article2.txt").write_text(
        "Quiet day at the market\nTraders met while the grumblie vexing rumor spread\n",
        encoding="utf-8",
    )
    return root


def test_article_loading_and_slicing(corpus):
    articles = st.load_articles(corpus)
    assert [a.id for a in articles] == ["1", "2"]
    assert articles[0].title == "Glorious leader graces our town"
    assert st.slice(articles[0], st.CharSpan(37, 53)) == "zorblat quixotic"


def test_tokenize_and_snap():
    tokens = st.tokenize("He said, go!")
    assert [t.text for t in tokens] == ["He", "said", ",", "go", "!"]
    assert tokens[1].span == st.CharSpan(3, 7)
    rng = st.snap_span(st.CharSpan(4, 6), tokens)
    assert (rng.begin, rng.end) == (1, 2)


def test_tag_round_trip():
    tags = st.encode_tags(st.Scheme.BIOE, 6, [st.TokenRange(3, 6)])
    assert st.format_tags(tags) == "O O O B I E"
    tokens = st.tokenize("a b c d e f")
    spans = st.decode_tags(tags, tokens)
    assert spans == [st.CharSpan(tokens[3].span.begin, tokens[5].span.end)]
    assert st.validate_tags(tags) == []
    converted = st.convert_tags(tags, st.Scheme.BIOES)
    assert st.format_tags(converted) == "O O O B I E"


def test_annotation_round_trip_and_errors():
    text = "111\tLoaded_Language\t34\t40\n"
    anns = st.parse_annotations(text, st.AnnotationKind.TC)
    assert anns[0].technique == "Loaded_Language"
    assert st.write_annotations(anns, st.AnnotationKind.TC) == text
    with pytest.raises(st.DataError):
        st.parse_annotations("1\t9\t5\n", st.AnnotationKind.SI)


def test_scoring():
    pred = [st.SpanAnnotation("1", st.CharSpan(0, 10))]
    gold = [st.SpanAnnotation("1", st.CharSpan(5, 15))]
    score = st.score_si(pred, gold)
    assert score.precision == 0.5 and score.recall == 0.5 and score.f1 == 0.5

    tc_pred = [st.SpanAnnotation("1", st.CharSpan(0, 5), "A"),
               st.SpanAnnotation("1", st.CharSpan(6, 9), "A")]
    tc_gold = [st.SpanAnnotation("1", st.CharSpan(0, 5), "A"),
               st.SpanAnnotation("1", st.CharSpan(6, 9), "B")]
    assert st.score_tc(tc_pred, tc_gold).micro_f1 == 0.5


def test_context_extraction(corpus):
    articles = st.load_articles(corpus)
    pair = st.extract_sentence_context(articles[0], st.CharSpan(37, 53))
    assert pair.fragment_text == "zorblat quixotic"
    assert pair.context_text == "The zorblat quixotic plan begins today"
    title = st.extract_title_context(articles[0])
    assert title.context_text == articles[0].title


def test_encoder_basics():
    assert st.fnv1a64("a") == 0xAF63DC4C8601EC8C
    vec = st.encode_sequence("hello world", 64)
    assert len(vec) == 64
    assert abs(sum(v * v for v in vec) - 1.0) < 1e-9
    combined = st.combine([1.0, 2.0], [3.0, 4.0],
                          st.CombinationStrategy(st.CombineKind.WEIGHTED_AVG, alpha=0.5))
    assert combined == [2.0, 3.0]


def test_si_training_pipeline(corpus):
    articles = st.load_articles(corpus)
    gold = st.parse_annotations("1\t37\t53\n2\t46\t61\n", st.AnnotationKind.SI)
    sentences = []
    for article in articles:
        spans = [a.span for a in gold if a.article_id == article.id]
        for sentence in st.split_sentences(article):
            ranges = [r for r in (st.snap_span(s, sentence.tokens) for s in spans)
                      if not r.empty()]
            tags = st.encode_tags(st.Scheme.BIOE, len(sentence.tokens), ranges)
            sentences.append(st.TaggedSentence(sentence.tokens, tags))

    config = st.TrainConfig()
    config.dim = 128
    config.epochs = 30
    result = st.train_si(sentences, st.Scheme.BIOE, config)
    assert len(result.epoch_loss) == 30

    predictions = []
    for article in articles:
        predictions.extend(st.predict_si(result.model, article))
    assert st.score_si(predictions, gold).f1 == 1.0

    reread = st.parse_tagger(st.write_tagger(result.model))
    assert reread.weights == result.model.weights


def test_tc_training_pipeline(corpus):
    articles = st.load_articles(corpus)
    gold = st.parse_annotations(
        "1\tLoaded_Language\t37\t53\n2\tDoubt\t46\t61\n", st.AnnotationKind.TC
    )
    pairs = st.build_tc_dataset(articles, gold, st.ContextKind.SENTENCE)
    config = st.TrainConfig()
    config.dim = 128
    config.epochs = 40
    encoder = st.SequenceEncoder(dim=config.dim)
    result = st.train_tc(pairs, st.CombinationStrategy(st.CombineKind.CONCAT_EMBED),
                         config, encoder)
    for pair in pairs:
        assert st.predict_tc(result.model, pair, encoder).technique == pair.technique
    probs = st.predict_tc(result.model, pairs[0], encoder).probabilities
    assert abs(sum(probs) - 1.0) < 1e-9


def test_analytics():
    anns = [st.SpanAnnotation("1", st.CharSpan(0, 10), "Loaded_Language"),
            st.SpanAnnotation("1", st.CharSpan(0, 30), "Doubt")]
    hist = st.class_histogram(anns)
    assert sorted(hist) == [("Doubt", 1), ("Loaded_Language", 1)]
    assert st.technique_category("Loaded_Language") == 1
    assert st.technique_category("Doubt") == 2
    assert st.average_span_length([a.span for a in anns]) == 20.0


def test_cli_in_process(corpus, tmp_path):
    labels = tmp_path / "si.tsv"
    labels.write_text("1\t37\t53\n2\t46\t61\n", encoding="utf-8")
    out = tmp_path / "tags.txt"
    rc = st.run_cli(["encode-tags", "--articles", str(corpus), "--labels", str(labels),
                     "--scheme", "BIOE", "--out", str(out)])
    assert rc == 0
    lines = out.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 4  # two articles, two non-blank lines each
    assert st.run_cli(["no-such-command"]) == 1


def test_split_train_dev():
    train, dev = st.split_train_dev([str(i) for i in range(10)], 0.9, 42)
    assert len(train) == 9 and len(dev) == 1
    again = st.split_train_dev([str(i) for i in range(10)], 0.9, 42)
    assert (train, dev) == again
