"""Green-list watermarking over a toy sampling model, plus its detector.

The scheme hashes the previous token to seed a pseudo-random partition of
the vocabulary; the first round(gamma * V) ids of that permutation form
the green list, whose logits get a +delta bias during generation.
Detection counts how many tokens fall in their predecessor's green list
and applies the one-proportion z-test

    z = (green_count - gamma * T) / sqrt(T * gamma * (1 - gamma))

scored over all tokens but the first (which has no predecessor).

Green-list derivation, exactly: seed = mix64(hash_key XOR prev_token);
draw one 64-bit SplitMix64 value per vocabulary id from that seed; the
permutation is the ids sorted ascending by their drawn value (stable on
ties); the green list is its first round(gamma * V) ids.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from ._rng import MASK64, SplitMix64, derive_seed, mix64, u64_stream
from .detectors import HIGHER_IS_AI, DetectorVerdict, make_verdict
from .tokenizer import Vocab, decode, tokenize

DEFAULT_HASH_KEY = 15485863  # arbitrary large prime, part of the seed contract
DEFAULT_Z_THRESHOLD = 4.0

LogitsFn = Callable[[tuple[int, ...]], np.ndarray]


@dataclass(frozen=True)
class WatermarkConfig:
    """Green-list watermark hyperparameters."""

    gamma: float
    delta: float
    vocab_size: int
    hash_key: int = DEFAULT_HASH_KEY
    z_threshold: float = DEFAULT_Z_THRESHOLD

    def __post_init__(self) -> None:
        if not 0.0 < self.gamma < 1.0:
            raise ValueError("gamma must be in (0, 1)")
        if self.delta < 0.0:
            raise ValueError("delta must be nonnegative")
        if self.vocab_size < 2:
            raise ValueError("vocab_size must be >= 2")
        if not 1 <= self.green_size <= self.vocab_size - 1:
            raise ValueError("green list size must be in [1, vocab_size - 1]")

    @property
    def green_size(self) -> int:
        return round(self.gamma * self.vocab_size)


@dataclass(frozen=True)
class ZTestResult:
    green_count: int
    total: int
    z: float
    is_watermarked: bool


class _GreenLists:
    """Per-config cache of green index arrays and membership masks."""

    def __init__(self, config: WatermarkConfig):
        self.config = config
        self._indices: dict[int, np.ndarray] = {}
        self._masks: dict[int, np.ndarray] = {}

    def indices(self, prev_token: int) -> np.ndarray:
        cached = self._indices.get(prev_token)
        if cached is None:
            config = self.config
            if not 0 <= prev_token < config.vocab_size:
                raise ValueError(f"prev_token {prev_token} outside vocabulary")
            seed = mix64((config.hash_key ^ prev_token) & MASK64)
            keys = u64_stream(seed, config.vocab_size)
            cached = np.argsort(keys, kind="stable")[: config.green_size]
            self._indices[prev_token] = cached
        return cached

    def mask(self, prev_token: int) -> np.ndarray:
        cached = self._masks.get(prev_token)
        if cached is None:
            cached = np.zeros(self.config.vocab_size, dtype=bool)
            cached[self.indices(prev_token)] = True
            self._masks[prev_token] = cached
        return cached


_caches: dict[WatermarkConfig, _GreenLists] = {}


def _green_cache(config: WatermarkConfig) -> _GreenLists:
    cache = _caches.get(config)
    if cache is None:
        cache = _caches[config] = _GreenLists(config)
    return cache


def green_list(config: WatermarkConfig, prev_token: int) -> frozenset[int]:
    """The green token ids induced by the previous token."""
    return frozenset(int(i) for i in _green_cache(config).indices(prev_token))


def generate(
    config: WatermarkConfig,
    base_logits: LogitsFn,
    length: int,
    seed: int,
) -> list[int]:
    """Sample a watermarked token stream.

    Each step adds ``delta`` to the green logits of the previous token,
    softmaxes, and samples by inverse CDF from a SplitMix64 stream. The
    first token is drawn from the unmodified logits (no predecessor).
    With delta == 0 the output is exactly unwatermarked sampling.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    rng = SplitMix64(seed)
    cache = _green_cache(config)
    out: list[int] = []
    for _ in range(length):
        logits = np.asarray(base_logits(tuple(out)), dtype=float)
        if logits.shape != (config.vocab_size,):
            raise ValueError("base_logits must return one logit per vocabulary id")
        if out:
            logits = logits.copy()
            logits[cache.indices(out[-1])] += config.delta
        weights = np.exp(logits - logits.max())
        cdf = np.cumsum(weights)
        u = rng.random() * cdf[-1]
        token = int(np.searchsorted(cdf, u, side="right"))
        out.append(min(token, config.vocab_size - 1))
    return out


def z_test(config: WatermarkConfig, tokens: Sequence[int]) -> ZTestResult:
    """One-proportion z-test for green-token excess over a token stream."""
    if len(tokens) < 2:
        raise ValueError("z-test needs at least 2 tokens")
    cache = _green_cache(config)
    green_count = 0
    for prev, cur in zip(tokens, tokens[1:]):
        if cache.mask(prev)[cur]:
            green_count += 1
    total = len(tokens) - 1
    z = (green_count - config.gamma * total) / math.sqrt(
        total * config.gamma * (1.0 - config.gamma)
    )
    return ZTestResult(
        green_count=green_count,
        total=total,
        z=z,
        is_watermarked=z > config.z_threshold,
    )


def watermark_detector(
    config: WatermarkConfig, text: str, vocab: Vocab
) -> DetectorVerdict:
    """Tokenize, z-test, and label AI iff z exceeds the threshold."""
    ids = tokenize(vocab, text).ids
    if len(ids) < 2:
        raise ValueError("text too short to test for a watermark")
    result = z_test(config, ids)
    return make_verdict("watermark", result.z, config.z_threshold, HIGHER_IS_AI)


class WatermarkTextDetector:
    """Detector-protocol wrapper around a config and tokenizer vocab."""

    def __init__(self, config: WatermarkConfig, vocab: Vocab, name: str = "watermark"):
        if vocab.size != config.vocab_size:
            raise ValueError("config vocab_size must match the tokenizer vocabulary")
        self.config = config
        self.vocab = vocab
        self.name = name

    def detect(self, text: str) -> DetectorVerdict:
        verdict = watermark_detector(self.config, text, self.vocab)
        return make_verdict(self.name, verdict.raw_score, verdict.threshold, HIGHER_IS_AI)


def word_unigram_model(
    words_with_counts: Sequence[tuple[str, int]],
) -> tuple[Vocab, np.ndarray]:
    """Toy base model: a unigram distribution over corpus words.

    Each word becomes one vocabulary entry with a single leading space,
    so greedy longest-match tokenization of generated text recovers the
    generated token stream exactly. Byte-fallback ids get -inf logits and
    are never sampled.
    """
    entries = []
    for word, _ in words_with_counts:
        if not word or " " in word:
            raise ValueError(f"lexicon words must be nonempty and space-free: {word!r}")
        entries.append(" " + word)
    vocab = Vocab.from_entries(entries)
    logits = np.full(vocab.size, -np.inf)
    for (word, count), entry in zip(words_with_counts, entries):
        if count < 1:
            raise ValueError(f"count for {word!r} must be >= 1")
        logits[vocab.entries[entry]] = math.log(count)
    return vocab, logits


def generate_dataset(
    config: WatermarkConfig,
    vocab: Vocab,
    logits: np.ndarray,
    length: int,
    count: int,
    seed: int,
):
    """Watermarked AI samples plus delta=0 human-proxy samples.

    Returns 2 * count TextSamples: ids wm-NNNN labeled "ai" and pl-NNNN
    labeled "human", all of ``length`` tokens from the same base model.
    """
    from .evaluation import TextSample

    if count < 1:
        raise ValueError("count must be >= 1")
    base: LogitsFn = lambda history: logits
    plain_config = replace(config, delta=0.0)
    samples = []
    for i in range(count):
        tokens = generate(config, base, length, derive_seed(seed, "watermarked", i))
        samples.append(TextSample(id=f"wm-{i:04d}", text=decode(vocab, tokens), label="ai"))
    for i in range(count):
        tokens = generate(plain_config, base, length, derive_seed(seed, "plain", i))
        samples.append(TextSample(id=f"pl-{i:04d}", text=decode(vocab, tokens), label="human"))
    return samples
