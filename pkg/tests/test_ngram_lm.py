import math

import pytest

from glyphlab.attacks import random_attack
from glyphlab.confusables import builtin_table
from glyphlab.ngram_lm import (
    NGramModel,
    PerplexityDetector,
    calibrate_threshold,
    perplexity_detector,
    score,
    token_loglikelihood_scorer,
    train,
)
from glyphlab.tokenizer import Vocab, build_vocab, tokenize


class TestTrain:
    def test_bigram_hand_count(self):
        # corpus [[1,1,1]] at order 2: two (1 -> 1) bigrams plus BOS -> 1.
        k, v = 0.5, 10
        model = train([[1, 1, 1]], order=2, smoothing_k=k, vocab_size=v)
        assert model.log_prob((1,), 1) == pytest.approx(math.log((2 + k) / (2 + k * v)), abs=1e-15)
        assert model.log_prob((-1,), 1) == pytest.approx(math.log((1 + k) / (1 + k * v)), abs=1e-15)

    def test_untrained_model_is_uniform(self):
        model = train([], order=2, smoothing_k=0.5, vocab_size=8)
        for token in range(8):
            assert model.log_prob((3,), token) == pytest.approx(math.log(1 / 8))

    def test_training_is_deterministic(self):
        corpus = [[1, 2, 3], [2, 3, 4]]
        a = train(corpus, 3, 0.5, 16)
        b = train(list(corpus), 3, 0.5, 16)
        assert a.counts == b.counts
        assert a.to_json() == b.to_json()

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            train([], order=0, smoothing_k=0.5, vocab_size=4)
        with pytest.raises(ValueError):
            train([], order=2, smoothing_k=0.0, vocab_size=4)

    def test_normalization_sums_to_one(self):
        model = train([[0, 1, 2, 1, 0, 2]], order=2, smoothing_k=0.5, vocab_size=3)
        for ctx in [(-1,), (0,), (1,), (2,)]:
            total = sum(math.exp(model.log_prob(ctx, t)) for t in range(3))
            assert total == pytest.approx(1.0, abs=1e-9)


class TestScore:
    def test_uniform_quarter_probability(self):
        # 4 tokens, each with probability 1/4, is perplexity 4 exactly.
        model = train([], order=1, smoothing_k=1.0, vocab_size=4)
        result = score(model, [0, 1, 2, 3])
        assert result.perplexity == pytest.approx(4.0, rel=1e-12)
        assert result.n_tokens == 4

    def test_arithmetic_oracle_half_and_eighth(self):
        # Contrived counts give P(0) = 1/2 and P(1) = 1/8 exactly under
        # add-1 smoothing with V=8: (7+1)/(8+8) and (1+1)/(8+8).
        model = NGramModel(order=1, smoothing_k=1.0, vocab_size=8)
        model.counts[()] = {0: 7, 1: 1}
        model.context_totals[()] = 8
        result = score(model, [0, 1])
        assert math.exp(result.loglikelihoods[0]) == pytest.approx(0.5, rel=1e-12)
        assert math.exp(result.loglikelihoods[1]) == pytest.approx(0.125, rel=1e-12)
        assert result.perplexity == pytest.approx(4.0, rel=1e-12)

    def test_perplexity_identity(self):
        model = train([[1, 2, 3, 4, 2, 1]], order=2, smoothing_k=0.3, vocab_size=6)
        result = score(model, [4, 3, 2, 1])
        mean = sum(result.loglikelihoods) / result.n_tokens
        assert result.perplexity == pytest.approx(math.exp(-mean), rel=1e-12)

    def test_empty_sequence_rejected(self):
        model = train([], order=2, smoothing_k=0.5, vocab_size=4)
        with pytest.raises(ValueError):
            score(model, [])

    def test_json_round_trip(self):
        model = train([[1, 2, 1, 3]], order=2, smoothing_k=0.5, vocab_size=5)
        again = NGramModel.from_json(model.to_json())
        assert again.counts == model.counts
        assert again.context_totals == model.context_totals
        assert score(again, [1, 2, 3]).perplexity == score(model, [1, 2, 3]).perplexity


def small_setup():
    corpus_texts = ["the cat sat on the mat", "the cat ran to the mat"] * 3
    vocab = build_vocab(corpus_texts, 300)
    model = train([tokenize(vocab, t) for t in corpus_texts], 2, 0.5, vocab.size)
    return vocab, model


class TestPerplexityDetector:
    def test_low_perplexity_labels_ai(self):
        vocab, model = small_setup()
        verdict = perplexity_detector(model, 1e6, "the cat sat on the mat", vocab)
        assert verdict.label == "ai"
        assert verdict.polarity == "lower-is-ai"

    def test_tie_is_human(self):
        vocab, model = small_setup()
        p = score(model, tokenize(vocab, "the cat sat")).perplexity
        assert perplexity_detector(model, p, "the cat sat", vocab).label == "human"

    def test_empty_text_rejected(self):
        vocab, model = small_setup()
        with pytest.raises(ValueError):
            perplexity_detector(model, 10.0, "", vocab)

    def test_threshold_must_be_positive(self):
        vocab, model = small_setup()
        with pytest.raises(ValueError):
            perplexity_detector(model, 0.0, "text", vocab)

    def test_detector_protocol_wrapper(self):
        vocab, model = small_setup()
        detector = PerplexityDetector(model, vocab, threshold=1e6, name="ppl")
        verdict = detector.detect("the cat sat")
        assert verdict.detector_name == "ppl"
        assert verdict.label == "ai"

    def test_greedy_attack_flips_label(self):
        from glyphlab.attacks import greedy_attack

        vocab, model = small_setup()
        text = "the cat sat on the mat"
        clean = score(model, tokenize(vocab, text)).perplexity
        attacked = greedy_attack(builtin_table(), text).attacked
        threshold = clean * 2
        assert perplexity_detector(model, threshold, text, vocab).label == "ai"
        assert perplexity_detector(model, threshold, attacked, vocab).label == "human"


class TestCalibrateThreshold:
    def test_perfectly_separable(self):
        vocab, model = small_setup()
        labeled = [("the cat sat on the mat", "ai")] * 3 + [("zyx qwv jkl pbf", "human")] * 3
        threshold = calibrate_threshold(model, labeled, vocab)
        for text, label in labeled:
            p = score(model, tokenize(vocab, text)).perplexity
            assert (p < threshold) == (label == "ai")

    def test_identical_scores_returns_single_value(self):
        vocab, model = small_setup()
        labeled = [("same text", "ai"), ("same text", "human")]
        p = score(model, tokenize(vocab, "same text")).perplexity
        assert calibrate_threshold(model, labeled, vocab) == p

    def test_matches_exhaustive_search(self):
        from glyphlab.evaluation import ConfusionMatrix, mcc

        vocab, model = small_setup()
        labeled = [
            ("the cat sat on the mat", "ai"),
            ("the cat ran to the mat", "ai"),
            ("zyx qwv", "human"),
            ("the mat sat", "human"),
        ]
        scored = [
            (score(model, tokenize(vocab, t)).perplexity, label) for t, label in labeled
        ]
        unique = sorted({s for s, _ in scored})
        best = (-2.0, None)
        for threshold in [(a + b) / 2 for a, b in zip(unique, unique[1:])]:
            tp = sum(1 for s, l in scored if s < threshold and l == "ai")
            fp = sum(1 for s, l in scored if s < threshold and l == "human")
            fn = sum(1 for s, l in scored if s >= threshold and l == "ai")
            tn = sum(1 for s, l in scored if s >= threshold and l == "human")
            m = mcc(ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn))
            if m > best[0]:
                best = (m, threshold)
        assert calibrate_threshold(model, labeled, vocab) == best[1]

    def test_single_class_rejected(self):
        vocab, model = small_setup()
        with pytest.raises(ValueError):
            calibrate_threshold(model, [("a", "ai"), ("b", "ai")], vocab)


class TestTokenScorer:
    def test_spans_map_to_character_offsets(self):
        vocab, model = small_setup()
        scorer = token_loglikelihood_scorer(model, vocab)
        text = "the cаt sat"  # Cyrillic а splits into two byte tokens
        spans = scorer(text)
        assert spans, "expected at least one token"
        assert spans[0][0] == 0
        assert spans[-1][1] == len(text)
        for start, end, loglik in spans:
            assert 0 <= start < end <= len(text)
            assert loglik < 0.0

    def test_empty_text_gives_no_tokens(self):
        vocab, model = small_setup()
        assert token_loglikelihood_scorer(model, vocab)("") == []


def test_attacked_text_scores_lower_mean_loglikelihood():
    # Module-scale version of the distribution-shift check.
    from glyphlab import corpus

    texts = corpus.generate_samples(30, seed=5)
    vocab = build_vocab([corpus.generate_text(60_000, seed=6)], 2048)
    model = train([tokenize(vocab, t) for t in texts], 3, 0.5, vocab.size)
    table = builtin_table()
    lower = 0
    for i, text in enumerate(texts):
        attacked = random_attack(table, text, 0.10, seed=100 + i).attacked
        if (
            score(model, tokenize(vocab, attacked)).mean_loglikelihood
            < score(model, tokenize(vocab, text)).mean_loglikelihood
        ):
            lower += 1
    assert lower >= 29
