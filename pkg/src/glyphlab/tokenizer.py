"""Greedy longest-match subword tokenizer with byte fallback.

A deliberately small surrogate for production BPE tokenizers: the
vocabulary is the 256 single-byte fallback tokens plus the most frequent
character n-grams of a corpus, and tokenization is repeated greedy
longest-match over the UTF-8 byte string. What matters for this toolkit
is the property the surrogate shares with real tokenizers: byte sequences
that never occurred in the vocabulary corpus (such as homoglyph-attacked
words) fall back to many short tokens instead of few long ones.
"""
from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

NGRAM_LENGTHS = range(2, 9)


@dataclass(frozen=True)
class TokenSeq:
    """Token ids plus the (byte start, byte end) span of each token."""

    ids: tuple[int, ...]
    spans: tuple[tuple[int, int], ...]

    def __len__(self) -> int:
        return len(self.ids)


@dataclass(frozen=True)
class Vocab:
    """Token vocabulary: 256 byte-fallback slots plus multi-char entries.

    Byte b always has id ``byte_fallback_base + b``; entry ids continue
    densely after the byte block.
    """

    entries: dict[str, int]
    byte_fallback_base: int = 0
    _by_bytes: dict[bytes, int] = field(init=False, repr=False, compare=False)
    _id_to_bytes: dict[int, bytes] = field(init=False, repr=False, compare=False)
    _lengths: tuple[int, ...] = field(init=False, repr=False, compare=False)
    _first_bytes: frozenset[int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if self.byte_fallback_base != 0:
            raise ValueError("byte fallback block must start at id 0")
        by_bytes: dict[bytes, int] = {}
        for token, token_id in self.entries.items():
            if not token:
                raise ValueError("empty token string in vocabulary")
            by_bytes[token.encode("utf-8")] = token_id
        expected = set(range(256, 256 + len(self.entries)))
        if set(self.entries.values()) != expected:
            raise ValueError("entry ids must be dense starting at 256")
        lengths = sorted({len(b) for b in by_bytes}, reverse=True)
        object.__setattr__(self, "_by_bytes", by_bytes)
        object.__setattr__(self, "_id_to_bytes", {i: b for b, i in by_bytes.items()})
        object.__setattr__(self, "_lengths", tuple(lengths))
        object.__setattr__(self, "_first_bytes", frozenset(b[0] for b in by_bytes))

    @property
    def size(self) -> int:
        return 256 + len(self.entries)

    @staticmethod
    def from_entries(tokens: Sequence[str]) -> "Vocab":
        """Vocabulary with the given entries, ids assigned in list order."""
        return Vocab(entries={tok: 256 + i for i, tok in enumerate(tokens)})

    def id_to_bytes(self, token_id: int) -> bytes:
        if 0 <= token_id - self.byte_fallback_base < 256:
            return bytes([token_id - self.byte_fallback_base])
        return self._id_to_bytes[token_id]

    def to_json(self) -> str:
        payload = {"entries": self.entries, "byte_fallback_base": self.byte_fallback_base}
        return json.dumps(payload, ensure_ascii=True, sort_keys=True) + "\n"

    @staticmethod
    def from_json(text: str) -> "Vocab":
        payload = json.loads(text)
        return Vocab(
            entries=dict(payload["entries"]),
            byte_fallback_base=payload.get("byte_fallback_base", 0),
        )


def build_vocab(corpus: Iterable[str], max_size: int) -> Vocab:
    """Frequency-ranked character n-gram vocabulary over a corpus.

    The vocabulary is the 256 byte tokens plus the (max_size - 256) most
    frequent character n-grams of lengths 2..8, ties broken
    lexicographically, so identical corpora yield identical vocabularies.
    """
    if max_size < 256:
        raise ValueError("max_size must be at least 256")
    counts: Counter[str] = Counter()
    for text in corpus:
        for n in NGRAM_LENGTHS:
            if len(text) < n:
                break
            counts.update(text[i : i + n] for i in range(len(text) - n + 1))
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return Vocab.from_entries([ngram for ngram, _ in ranked[: max_size - 256]])


def tokenize(vocab: Vocab, text: str) -> TokenSeq:
    """Greedy longest-match tokenization of the UTF-8 byte string.

    Where no multi-byte entry matches, one byte-fallback token is emitted
    per byte, so the spans always reconstruct the input exactly.
    """
    data = text.encode("utf-8")
    n = len(data)
    by_bytes = vocab._by_bytes
    lengths = vocab._lengths
    first_bytes = vocab._first_bytes
    base = vocab.byte_fallback_base
    ids: list[int] = []
    spans: list[tuple[int, int]] = []
    pos = 0
    while pos < n:
        matched = False
        if data[pos] in first_bytes:
            remaining = n - pos
            for length in lengths:
                if length > remaining:
                    continue
                token_id = by_bytes.get(data[pos : pos + length])
                if token_id is not None:
                    ids.append(token_id)
                    spans.append((pos, pos + length))
                    pos += length
                    matched = True
                    break
        if not matched:
            ids.append(base + data[pos])
            spans.append((pos, pos + 1))
            pos += 1
    return TokenSeq(ids=tuple(ids), spans=tuple(spans))


def decode(vocab: Vocab, ids: Iterable[int]) -> str:
    """Concatenate token byte strings back into text."""
    return b"".join(vocab.id_to_bytes(i) for i in ids).decode(
        "utf-8", errors="replace"
    )


def token_change_rate(vocab: Vocab, original: str, attacked: str) -> float:
    """Fraction of whitespace-delimited words whose token ids changed.

    Words are tokenized independently so each word's change is attributed
    to that word alone. Requires equal codepoint counts (attacks never
    insert or delete characters).
    """
    if len(original) != len(attacked):
        raise ValueError(
            f"codepoint count mismatch: {len(original)} != {len(attacked)}"
        )
    orig_words = original.split()
    att_words = attacked.split()
    if len(orig_words) != len(att_words):
        raise ValueError("whitespace structure changed between texts")
    if not orig_words:
        return 0.0
    changed = sum(
        tokenize(vocab, ow).ids != tokenize(vocab, aw).ids
        for ow, aw in zip(orig_words, att_words)
    )
    return changed / len(orig_words)
