"""Token n-gram language model with add-k smoothing and perplexity scoring.

Serves as the desk-scale stand-in for the large language models behind
perplexity-based AI-text detectors: it supplies per-token loglikelihoods,
perplexity (exp of the mean negative loglikelihood), a thresholded
detector, and an MCC-maximizing threshold calibrator.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .detectors import LOWER_IS_AI, DetectorVerdict, make_verdict
from .tokenizer import TokenSeq, Vocab, tokenize

BOS = -1  # context padding id, never predicted


@dataclass(frozen=True)
class PerplexityScore:
    """Per-token natural-log likelihoods and their perplexity."""

    loglikelihoods: tuple[float, ...]
    n_tokens: int
    perplexity: float

    @property
    def mean_loglikelihood(self) -> float:
        return sum(self.loglikelihoods) / self.n_tokens


@dataclass
class NGramModel:
    """Add-k smoothed n-gram model over token ids.

    ``counts`` maps an (order-1)-token context to the observed next-token
    counts; unseen events get probability k / (context_total + k * V).
    """

    order: int
    smoothing_k: float
    vocab_size: int
    counts: dict[tuple[int, ...], dict[int, int]] = field(default_factory=dict)
    context_totals: dict[tuple[int, ...], int] = field(default_factory=dict)

    def log_prob(self, context: tuple[int, ...], token: int) -> float:
        k = self.smoothing_k
        ctx_counts = self.counts.get(context)
        count = ctx_counts.get(token, 0) if ctx_counts else 0
        total = self.context_totals.get(context, 0)
        return math.log((count + k) / (total + k * self.vocab_size))

    def to_json(self) -> str:
        payload = {
            "order": self.order,
            "smoothing_k": self.smoothing_k,
            "vocab_size": self.vocab_size,
            "counts": {
                " ".join(map(str, ctx)): {str(t): c for t, c in sorted(nxt.items())}
                for ctx, nxt in sorted(self.counts.items())
            },
        }
        return json.dumps(payload, sort_keys=True) + "\n"

    @staticmethod
    def from_json(text: str) -> "NGramModel":
        payload = json.loads(text)
        model = NGramModel(
            order=payload["order"],
            smoothing_k=payload["smoothing_k"],
            vocab_size=payload["vocab_size"],
        )
        for ctx_key, nxt in payload["counts"].items():
            ctx = tuple(int(t) for t in ctx_key.split()) if ctx_key else ()
            model.counts[ctx] = {int(t): c for t, c in nxt.items()}
            model.context_totals[ctx] = sum(model.counts[ctx].values())
        return model


def _ids_of(tokens: TokenSeq | Sequence[int]) -> tuple[int, ...]:
    return tuple(tokens.ids if isinstance(tokens, TokenSeq) else tokens)


def train(
    corpus: Iterable[TokenSeq | Sequence[int]],
    order: int,
    smoothing_k: float,
    vocab_size: int,
) -> NGramModel:
    """Accumulate n-gram counts over all sequences, with (order-1)
    begin-of-sequence padding so the first tokens are scored too."""
    if order < 1:
        raise ValueError("order must be >= 1")
    if smoothing_k <= 0:
        raise ValueError("smoothing_k must be positive")
    model = NGramModel(order=order, smoothing_k=smoothing_k, vocab_size=vocab_size)
    pad = (BOS,) * (order - 1)
    counts = model.counts
    totals = model.context_totals
    for tokens in corpus:
        ids = pad + _ids_of(tokens)
        for i in range(order - 1, len(ids)):
            ctx = ids[i - order + 1 : i]
            nxt = counts.setdefault(ctx, {})
            nxt[ids[i]] = nxt.get(ids[i], 0) + 1
            totals[ctx] = totals.get(ctx, 0) + 1
    return model


def score(model: NGramModel, tokens: TokenSeq | Sequence[int]) -> PerplexityScore:
    """Per-token loglikelihoods and perplexity of a nonempty sequence."""
    ids = _ids_of(tokens)
    if not ids:
        raise ValueError("cannot score an empty token sequence")
    padded = (BOS,) * (model.order - 1) + ids
    logliks = tuple(
        model.log_prob(padded[i - model.order + 1 : i], padded[i])
        for i in range(model.order - 1, len(padded))
    )
    mean = sum(logliks) / len(logliks)
    return PerplexityScore(
        loglikelihoods=logliks, n_tokens=len(logliks), perplexity=math.exp(-mean)
    )


def perplexity_detector(
    model: NGramModel, threshold: float, text: str, vocab: Vocab
) -> DetectorVerdict:
    """Flag text as AI-generated when its perplexity is strictly below
    the threshold (machine-like text is high-likelihood text)."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    if not text:
        raise ValueError("cannot score empty text")
    result = score(model, tokenize(vocab, text))
    return make_verdict("perplexity-ngram", result.perplexity, threshold, LOWER_IS_AI)


class PerplexityDetector:
    """Detector-protocol wrapper around an n-gram model and threshold."""

    def __init__(self, model: NGramModel, vocab: Vocab, threshold: float, name: str = "perplexity-ngram"):
        self.model = model
        self.vocab = vocab
        self.threshold = threshold
        self.name = name

    def detect(self, text: str) -> DetectorVerdict:
        if not text:
            raise ValueError("cannot score empty text")
        result = score(self.model, tokenize(self.vocab, text))
        return make_verdict(self.name, result.perplexity, self.threshold, LOWER_IS_AI)


def calibrate_threshold(
    model: NGramModel,
    labeled: Sequence[tuple[str, str]],
    vocab: Vocab,
) -> float:
    """Pick the perplexity threshold maximizing MCC on labeled texts.

    Candidates are the midpoints of consecutive sorted unique perplexity
    values (the single unique value when all scores coincide); ties in
    MCC resolve toward the lower threshold.
    """
    from .evaluation import ConfusionMatrix, mcc

    labels = {label for _, label in labeled}
    if labels != {"ai", "human"}:
        raise ValueError(f"need both classes to calibrate, got labels {sorted(labels)}")
    scored = [
        (score(model, tokenize(vocab, text)).perplexity, label)
        for text, label in labeled
    ]
    unique = sorted({s for s, _ in scored})
    if len(unique) == 1:
        return unique[0]
    candidates = [(a + b) / 2.0 for a, b in zip(unique, unique[1:])]
    best_threshold = candidates[0]
    best_mcc = -2.0
    for threshold in candidates:
        tp = fp = tn = fn = 0
        for s, label in scored:
            predicted_ai = s < threshold
            if predicted_ai:
                if label == "ai":
                    tp += 1
                else:
                    fp += 1
            elif label == "ai":
                fn += 1
            else:
                tn += 1
        m = mcc(ConfusionMatrix(tp=tp, fp=fp, tn=tn, fn=fn))
        if m > best_mcc:
            best_mcc = m
            best_threshold = threshold
    return best_threshold


def token_loglikelihood_scorer(model: NGramModel, vocab: Vocab):
    """Scorer for the targeted attack: text -> per-token
    (char_start, char_end, loglikelihood) triples."""

    def scorer(text: str) -> list[tuple[int, int, float]]:
        seq = tokenize(vocab, text)
        if not seq.ids:
            return []
        logliks = score(model, seq).loglikelihoods
        # Byte-fallback tokens may split a multi-byte character, so map
        # every byte position to the character that contains it.
        char_at_byte: list[int] = []
        for i, ch in enumerate(text):
            char_at_byte.extend([i] * len(ch.encode("utf-8")))
        return [
            (char_at_byte[start], char_at_byte[end - 1] + 1, ll)
            for (start, end), ll in zip(seq.spans, logliks)
        ]

    return scorer
